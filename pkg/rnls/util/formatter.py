"""defines format functions for the flow display and the command summaries.
"""
from typing import Tuple
import time
from . import terminal as Cursor


# bar characters: |███   |
LEFT_SEP = chr(0x007c)
FINISHED = chr(0x2588)
UNFINISHED = chr(0x0020)
RIGHT_SEP = chr(0x007c)


def progress_format(progress: Tuple[int, int], length: int = 25, colored: bool = True) -> str:
    """
    Format an iteration budget bar, 'current/total' appended.
    """
    current, total = progress[0] + 1, max(progress[1], 1)
    finished_length = min(int(current * length / total), length)
    output = '{0:>3}%'.format(int(current * 100 / total))
    bar = finished_length * FINISHED
    if colored:
        bar = Cursor.single_color('b') + bar + Cursor.reset_style()
    output += LEFT_SEP + bar + (length - finished_length) * UNFINISHED + RIGHT_SEP
    output += ' {0}/{1}'.format(int(current), int(total))
    return output


def period_time_format(_time: float) -> str:
    if _time < 0:
        return '--'
    _time = int(_time)

    m, s = divmod(_time, 60)
    h, m = divmod(m, 60)

    if h > 0:
        return '{0}:{1:0>2}:{2:0>2}'.format(h, m, s)
    elif m > 0:
        return '{0:0>2}:{1:0>2}'.format(m, s)
    else:
        return '{0}s'.format(s)


def eta_format(from_time, remain_steps, to_time=None):
    """
    Estimated time to exhaust the iteration budget, from the duration of the last step.
    """
    if to_time is None:
        to_time = time.time()
    return period_time_format((to_time - from_time) * remain_steps)


def value_format(key: str, value: float) -> str:
    if abs(value) >= 1e4 or (value != 0 and abs(value) < 1e-3):
        return '{0}: {1:.3e}'.format(key, value)
    return '{0}: {1:.6f}'.format(key, value)


def summary_format(**items) -> str:
    """One-line 'key=value' summary, floats with 10 significant digits."""
    parts = []
    for key, value in items.items():
        if isinstance(value, float):
            parts.append('{0}={1:.10g}'.format(key, value))
        else:
            parts.append('{0}={1}'.format(key, value))
    return ' '.join(parts)
