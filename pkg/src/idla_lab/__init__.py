"""Internal DLA on Z^2: growth, discrete potential theory, and fluctuation checks.

The package splits into six pieces:

* :mod:`idla_lab.potential_kernel` -- exact rational-pair values of the
  recurrent potential kernel plus its log asymptotics;
* :mod:`idla_lab.harmonic_field` -- the harmonic detector with a pole near
  a target point, and its ``1/(2 rho)`` super-level region;
* :mod:`idla_lab.engine` -- the reproducible growth engine and snapshot I/O;
* :mod:`idla_lab.events` -- early/late points, lateness field, thin
  tentacles, shell profiles and tower decompositions;
* :mod:`idla_lab.martingale` -- the stopped-particle process, its discrete
  quadratic-variation clock, and Brownian exit-time closed forms;
* :mod:`idla_lab.cli` -- the ``idla-lab`` experiment driver.
"""

__version__ = "0.1.0"

from .engine import (
    BoxOverflowError,
    GrowthHistory,
    SnapshotError,
    idla_grow,
    inner_radius,
    outer_radius,
    radius_profiles,
    read_snapshot,
    write_snapshot,
)
from .events import (
    ShellProfile,
    TowerDecomposition,
    detect_early,
    detect_late,
    event_complement_check,
    lateness_field,
    min_tower_energy,
    shell_profile,
    tentacle_scan,
    tower_decompose,
    tower_energy,
)
from .harmonic_field import (
    GridPoint,
    HarmonicPole,
    OmegaRegion,
    OriginOutsideError,
    build_omega,
    f_zeta,
    h_zeta,
    make_pole,
    mean_value_sum,
)
from .martingale import (
    MartingaleTrace,
    ParticleRecord,
    StoppedCluster,
    bm_sup_tail,
    exit_mgf_bound,
    exit_mgf_exact,
    martingale_trace,
    run_stopped_particle,
    split_step,
)
from .potential_kernel import (
    KernelTable,
    KernelValue,
    LambdaFit,
    build_kernel_table,
    fit_lambda,
    kernel_eval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
