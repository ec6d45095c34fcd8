"""
A convenient component register util that lets configuration files name potentials, initial states and flows.
"""
from ..util import NOTHING, MultiConst, is_nothing
from ..util.errors import ConfigError
from typing import Type, Any


class Registry:

    modules = MultiConst()
    def __init__(self, namespace: str) -> None:
        super().__init__()
        self.modules = {}
        self.namespace = namespace

    def register(self, name: str = None):
        def decorator(cls: Type[Any]):
            nonlocal name
            if name is None:
                name = cls.__name__
            self.modules[name] = cls
            return cls
        return decorator

    def build(self, name: str, *args, **kwargs):
        component = self.get(name)
        if is_nothing(component):
            raise ConfigError(
                'unknown {0} "{1}", expected one of {2}'.format(self.namespace, name, sorted(self.modules.keys())),
                rule='registered {0} name'.format(self.namespace)
            )
        return component(*args, **kwargs)

    def get(self, name):
        return self.modules.get(name, NOTHING)

    def names(self):
        return tuple(self.modules.keys())

    def __contains__(self, name):
        return name in self.modules

    def __getitem__(self, name):
        return self.get(name)

