from .config import ConfigError, SimConfig
from .extract import (ExtractionError, extract_lambda_curvature,
                      extract_lambda_orthogonality)
from .run import (LambdaSeries, SimulationResult, estimate_t_star, fit_collapse_law,
                  run_simulation)
from .solver import (BlowupError, MaxLevelsError, WaveState, energy, init_state,
                     refine_if_needed, step)
