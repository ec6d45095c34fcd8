from ..util.errors import OutputLockedError
import os

BASE_PATH = 'out'
LOCK_NAME = '.rnls.lock'
HISTORY_SUFFIX = '.history.json'


def join_path(*args):
    return os.path.join(*args)


def safe_makedirs(path):
    if os.path.exists(path) is False:
        os.makedirs(path)


def set_base_path(path: str):
    global BASE_PATH
    BASE_PATH = path
    safe_makedirs(BASE_PATH)


def get_base_path():
    return BASE_PATH


def get_field_path(name: str):
    return join_path(BASE_PATH, '{0}.field'.format(name))


def get_table_path(name: str, format: str = 'csv'):
    suffix = 'jsonl' if format == 'json-lines' else format
    return join_path(BASE_PATH, '{0}.{1}'.format(name, suffix))


def get_history_path(name: str):
    return join_path(BASE_PATH, name + HISTORY_SUFFIX)


class DirectoryLock:
    """
    Exclusive ownership of the output directory for one process, through a lock file created with O_EXCL.
    """

    def __init__(self, path: str = None):
        self.path = join_path(path if path is not None else BASE_PATH, LOCK_NAME)
        self._fd = None

    def __enter__(self):
        safe_makedirs(os.path.dirname(self.path) or '.')
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise OutputLockedError(
                'output directory is owned by another process (remove {0} if stale)'.format(self.path),
                rule='single owner of the output directory'
            )
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *_):
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
        try:
            os.remove(self.path)
        except FileNotFoundError:
            pass
