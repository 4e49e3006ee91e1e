"""Almost-oscillation toolkit for neutral difference equations with quasidifferences."""
from .classifier import (
    Tag,
    Verdict,
    WindowReport,
    classify_almost_oscillatory,
    oscillation_report,
    tends_to_zero_report,
)
from .criteria import (
    CriterionParams,
    CriterionReport,
    HypothesisError,
    check_lemma2,
    corollary_specialize,
    criterion1_series,
    criterion2_series,
    f_min,
    q_dstar,
    q_min,
    q_star,
    riccati_inequality_check,
    riccati_w,
)
from .equation import (
    EquationSpec,
    InitialData,
    SeqWindow,
    Trajectory,
    residual,
    simulate,
    telescoping_defect,
    trajectory_to_csv,
)
from .numerics import Mode, OddRatio, odd_ratio_pow, odd_ratio_root
from .seqlang import eval_seq, parse_seq, to_text
from .specfile import SpecFile, load_bundled, load_spec_file

__version__ = "0.1.0"
