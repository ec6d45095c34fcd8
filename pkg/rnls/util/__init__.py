from typing import Dict, Iterator, Tuple
from collections.abc import Iterable
from functools import wraps
from time import time
import threading
import traceback
import os


def Singleton(cls):
    """Class decorator returning one shared instance per class (double-checked locking)."""
    _lock = threading.Lock()
    _instance = {}

    @wraps(cls, updated=())
    def wrapper(*args, **kwargs):
        if cls not in _instance:
            with _lock:
                if cls not in _instance:
                    _instance[cls] = cls(*args, **kwargs)
        return _instance[cls]
    return wrapper


# imported after Singleton, which the logger module needs
from ..log import logger


def InvocationDebug(module_name):
    """Emit 'begin.' and 'end.' debug lines around every call of the decorated function."""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger.debug(module_name, 'begin.')
            result = func(*args, **kwargs)
            logger.debug(module_name, 'end.')
            return result
        return wrapper
    return decorator


@Singleton
class Nothing:
    """
    Placeholder for unset context entries. Unlike None it absorbs attribute access, indexing and calls,
    and is falsy and empty.
    """

    def __call__(self, *args, **kwargs):
        return self

    def __getattribute__(self, *_):
        return self

    def __getitem__(self, *_):
        return self

    def __setattr__(self, *_):
        pass

    def __setitem__(self, *_):
        pass

    def __len__(self):
        return 0

    def __iter__(self):
        return iter(())

    def __bool__(self):
        return False

    def __repr__(self) -> str:
        return 'NOTHING'

    __str__ = __repr__


NOTHING = Nothing()


def is_nothing(obj) -> bool:
    return obj is NOTHING


def check_nothing(obj, x, y=NOTHING):
    """x when obj is set, otherwise y."""
    return y if is_nothing(obj) else x


def dict_merge(dict1: Dict, dict2: Dict) -> Dict:
    return {**dict1, **dict2}


class Base:
    """
    Attribute bag with dict-style access. Missing attributes read as NOTHING; failures during item access
    are logged instead of raised.
    """

    def from_dict(self, kwargs: Dict):
        self.__dict__.update(kwargs)

    def check(self, item: str) -> bool:
        """Whether a dotted attribute path resolves to a set value."""
        temp = self
        for attr in item.split('.'):
            try:
                temp = temp[attr]
            except Exception:
                self.process_exc()
                return False
            if is_nothing(temp):
                return False
        return True

    @staticmethod
    def process_exc():
        logger.error('Python exception raised:\n' + traceback.format_exc())
        return NOTHING

    def __getattr__(self, *_):
        return NOTHING

    def __getitem__(self, key):
        try:
            return getattr(self, key)
        except Exception:
            return self.process_exc()

    def __setitem__(self, key, value):
        try:
            setattr(self, key, value)
        except Exception:
            self.process_exc()

    def __delattr__(self, name: str) -> None:
        try:
            super().__delattr__(name)
        except AttributeError:
            pass


class MultiConst:
    """
    Per-instance write-once attribute: the first non-NOTHING value sticks, later assignments are
    ignored with a warning. The value lives in a '_'-prefixed private attribute.
    """

    def __set_name__(self, _, name):
        self.private_name = '_' + name

    def __set__(self, instance, value):
        if is_nothing(getattr(instance, self.private_name, NOTHING)):
            setattr(instance, self.private_name, value)
        else:
            logger.warn('The value of "{0}" cannot be changed.'.format(self.private_name[1:]))

    def __get__(self, instance, _):
        return getattr(instance, self.private_name, NOTHING)


class BaseList(list):

    def __init__(self, list_like=None):
        if list_like is None or is_nothing(list_like):
            super().__init__()
        else:
            super().__init__(list_like if isinstance(list_like, Iterable) else [list_like])


def MethodChaining(func):
    @wraps(func)
    def wrapper(self, *args, **kwargs):
        func(self, *args, **kwargs)
        return self
    return wrapper


def step_clock(total: int) -> Iterator[Tuple[int, float]]:
    """Yield (index, wall time) for index in range(total)."""
    for index in range(total):
        yield index, time()


def worker_count() -> int:
    """Number of concurrent solver jobs, overridden by the RNLS_THREADS environment variable."""
    value = os.environ.get('RNLS_THREADS', '').strip()
    if value == '':
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        logger.warn('RNLS_THREADS={0} is not an integer, using a single worker.'.format(value))
        return 1
