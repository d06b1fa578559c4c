from .config import RunConfig
from .fusion import FusionSpec, fuse
from .run import run_task
from .synth import SyntheticCorpus, gen_synthetic

__all__ = ["RunConfig", "FusionSpec", "fuse", "run_task", "SyntheticCorpus", "gen_synthetic"]
