import os
from dataclasses import dataclass, field
from typing import List, Optional

from ..cfdro_core.training import TrainerConfig


@dataclass(frozen=True)
class DatasetSpec:
    """
    lin | example1 | adult:<csv> | compas:<csv> | custom:<csv>:<scm.json>
    """
    kind: str
    path: Optional[str] = None
    scm_path: Optional[str] = None

    @classmethod
    def parse(cls, spec: str) -> 'DatasetSpec':
        kind, _, rest = spec.partition(':')
        if kind == 'custom':
            path, _, scm_path = rest.partition(':')
            return cls(kind, path, scm_path)
        return cls(kind, rest or None)

    def __str__(self):
        return ':'.join(filter(None, (self.kind, self.path, self.scm_path)))

    @property
    def label(self) -> str:
        """
        short id used in artifact names and summaries
        """
        if self.path is None:
            return self.kind
        return f'{self.kind}-{os.path.splitext(os.path.basename(self.path))[0]}'

    @property
    def synthetic(self) -> bool:
        return self.kind in ('lin', 'example1')


@dataclass
class ExperimentConfig:
    datasets: List[DatasetSpec]
    trainers: List[TrainerConfig]
    seeds: List[int]
    radii: List[float]
    output_dir: str
    n: int = 2000
    norm: str = 'l1'
    train_fraction: float = 0.8
    sampling_budget: int = 64
    name: str = ''
    raw: dict = field(default_factory=dict)

    def cells(self):
        """
        (dataset, trainer, seed) in config order
        """
        for dataset in self.datasets:
            for trainer in self.trainers:
                for seed in self.seeds:
                    yield dataset, trainer, seed
