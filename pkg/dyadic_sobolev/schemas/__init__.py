from .series import HaarSeriesPayload
from .norms import NormReport
from .embedding import EmbeddingVerdict, EnsembleSpec
from .experiment import CounterexampleSpec, ExperimentReport
from .run import RunConfig
