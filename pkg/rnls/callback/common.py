from . import Callback
from ..core.context import Context
from ..log.directory import get_field_path, get_history_path, safe_makedirs
from ..log import logger
from ..util import is_nothing
from typing import Callable, Union
import json
import os


class SaveField(Callback):
    """Writes the final iterate as a field file when the flow ends."""

    def __init__(self, name: Union[str, Callable[[Context], str]] = 'gs', path: str = None):
        super().__init__()
        if (isinstance(name, str) or callable(name)) is False:
            logger.error('The field name should be a string or a function, "gs" is used instead.')
            name = 'gs'
        self.name = name
        self.path = path

    def end(self, ctx: Context):
        from ..grid import Field
        from ..io import write_field
        name = self.name(ctx) if callable(self.name) else self.name
        path = self.path if self.path is not None else get_field_path(name)
        safe_makedirs(os.path.dirname(path) or '.')
        write_field(Field(ctx.grid, ctx.flow.phi), ctx.params, path)
        logger.debug('Field saved to {0}.'.format(path))


class SaveHistory(Callback):
    """Collects the step metrics and dumps them as JSON when the flow ends."""

    def __init__(self, name: str = 'gs', save_per: int = 1):
        super().__init__()
        self.name = name
        self.save_per = max(int(save_per), 1)
        self.history = []

    def begin(self, ctx: Context):
        self.history = []

    def step_end(self, ctx: Context):
        if ctx.flow.iters % self.save_per == 0:
            item = {'iter': ctx.flow.iters, 'tau': ctx.flow.tau}
            if is_nothing(ctx.step.metrics) is False:
                item.update(**ctx.step.metrics)
            else:
                item.update(step_norm=ctx.step.step_norm, objective=ctx.step.objective)
            self.history.append(item)

    def end(self, ctx: Context):
        path = get_history_path(self.name)
        safe_makedirs(os.path.dirname(path) or '.')
        with open(path, 'w') as f:
            json.dump({
                'status': str(ctx.status).lower(),
                'converged': bool(ctx.flow.converged),
                'restarts': ctx.flow.restarts,
                'history': self.history
            }, f, indent=4)
