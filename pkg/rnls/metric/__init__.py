from abc import abstractmethod
from typing import Union, Dict, Sequence
from ..util.type import NUMBER, NUMBER_T
from ..util import is_nothing, dict_merge, NOTHING, BaseList
from ..core.context import Context


class Metric():

    def __init__(self, name: str = None):
        self.name = name if name is not None else type(self).__name__.lower()

    @abstractmethod
    def get(self, ctx: Context) -> Union[Dict, NUMBER]:
        pass

    def __call__(self, ctx: Context) -> Dict:
        result = self.get(ctx)
        if isinstance(result, Dict):
            return result
        elif isinstance(result, NUMBER_T):
            return { self.name: result }
        return NOTHING


# metric or sequence of metrics
M_SEQ = Union[Metric, Sequence[Metric]]


class MetricContainer(Metric, BaseList):

    def __init__(self, metrics: M_SEQ = None):
        super().__init__('metrics')
        BaseList.__init__(self, metrics)

    def get(self, ctx: Context) -> Union[Dict, NUMBER]:
        result = {}
        for metric in self:
            _res = metric(ctx)
            if is_nothing(_res) is False:
                result = dict_merge(result, _res)
        return result


class StepNorm(Metric):
    """max_j |phi^{n+1} - phi^n| / tau."""

    def __init__(self, name: str = 'step_norm'):
        super().__init__(name)

    def get(self, ctx: Context):
        return ctx.step.step_norm


class Objective(Metric):
    """The functional decreased by the flow: S for the action flow, E for the energy flow."""

    def __init__(self, name: str = None):
        super().__init__(name)

    def get(self, ctx: Context):
        key = self.name if self.name != 'objective' else str(ctx.status).lower()
        return { key: ctx.step.objective }


class Mass(Metric):

    def __init__(self, name: str = 'mass'):
        super().__init__(name)

    def get(self, ctx: Context):
        return ctx.step.mass


def default_metrics() -> MetricContainer:
    return MetricContainer([StepNorm(), Objective(), Mass()])
