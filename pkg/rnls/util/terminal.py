"""
ANSI cursor control for the one-line refreshing flow display. Output goes to standard error so that
standard output only carries command summaries.
"""
import sys


ESC = '\x1b'  # the ANSI escape code.
CSI = ESC + '['  # control Sequence Introducer.
CURSOR_START = '\r'  # move the cursor to the start of the row.
CURSOR_INVISIBLE = CSI + '?25l'
CURSOR_VISIBLE = CSI + '?25h'
CLEAR_LINE = CSI + '{}K'

CURSOR_VISIBILITY_ENABLED: bool = True

COLORS = {
    'r': 31,  # red
    'g': 32,  # green
    'y': 33,  # yellow
    'b': 34,  # blue
    'p': 35,  # purple
    'c': 36,  # cyan
    'w': 37  # white
}


def set_cursor_visibility_enabled(enabled: bool):
    global CURSOR_VISIBILITY_ENABLED
    CURSOR_VISIBILITY_ENABLED = enabled


def start():
    return CURSOR_START


def clear_line(mode: str = 'all'):
    clear_mode = {
        'after': 0,
        'before': 1,
        'all': 2
    }
    return CLEAR_LINE.format(clear_mode.get(mode, 2))


def single_color(color: str):
    return CSI + str(COLORS.get(color, 37)) + 'm'


def reset_style():
    return CSI + '0m'


def is_terminal(file=None) -> bool:
    file = file if file is not None else sys.stderr
    return bool(getattr(file, 'isatty', lambda: False)())


def execute(*commands, file=None):
    """
    Execute cursor commands.
    """
    file = file if file is not None else sys.stderr
    file.write(''.join(commands))
    file.flush()


def refresh_print(*contents, sep: str = ' ', file=None, end=''):
    """
    Clear the current row and print contents in place.
    """
    file = file if file is not None else sys.stderr
    execute(start(), clear_line(), file=file)
    file.write(sep.join(contents) + end)
    file.flush()


def cursor_invisible(file=None):
    """
    Make cursor invisible to avoid cursor flickering.
    """
    class InvisibleCursor:
        def __init__(self, file) -> None:
            self.file = file if file is not None else sys.stderr

        def __enter__(self):
            if CURSOR_VISIBILITY_ENABLED:
                execute(CURSOR_INVISIBLE, file=self.file)

        def __exit__(self, *_):
            if CURSOR_VISIBILITY_ENABLED:
                execute(CURSOR_VISIBLE, file=self.file)
    return InvisibleCursor(file)
