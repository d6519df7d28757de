"""riskcurves: expected ERM generalisation curves from a distribution of risks.

Given the density rho(r) of hypothesis risks for a learning scenario, the
package computes the expected error of empirical risk minimisation under
the annealed (independent-losses) approximation, its closed forms for
beta-shaped risk distributions and a gamma-precision regression model,
the exact risk densities of realisable and unrealisable perceptrons,
fluctuation corrections to the annealed curves, PAC-style sample-size
bounds driven by attunement, and a Monte Carlo oracle that validates all
of it.
"""

__version__ = "0.1.0"

from .classification import (
    ClassificationScenario,
    ExactRealisableInputs,
    LossPmf,
    boolean_expected_erm,
    erm_curve,
    exact_realisable_risk,
    expected_erm_risk,
    loss_pmf_beta,
    loss_pmf_generic,
    posterior_mean_risk,
    prob_min_loss,
)
from .corrections import (
    FluctuationParams,
    consistency_variance,
    corrected_expected_erm,
    delta_r,
    fluctuation_params,
    limit_curve,
    log_p_hat,
)
from .curve import Curve, RunManifest, write_csv
from .montecarlo import (
    ConsistencyProfile,
    Dataset,
    McConfig,
    McEstimate,
    estimate_consistency_profile,
    estimate_erm_risk,
    generate_dataset,
    sample_erm_hypothesis,
    sample_risks,
    sample_unit_sphere,
)
from .numerics import (
    LogValue,
    QuadratureResult,
    digamma,
    integrate,
    integrate_log,
    log_beta,
    maximize_unimodal,
    normal_cdf,
    normal_quantile,
    reg_inc_beta,
)
from .pac_asymptotics import (
    PacQuery,
    PowerLawFit,
    asymptotic_prediction,
    classical_pac_bound,
    fit_attunement,
    pac_sample_bound,
    posterior_tail,
)
from .regression import (
    GammaPrecisionModel,
    erm_loss_density,
    expected_erm_risk_regression,
    loss_cdf,
    loss_density,
    regression_curve,
)
from .risk_models import (
    AllBoolean,
    BetaApprox,
    BetaRisk,
    RealisablePerceptron,
    RiskDistribution,
    UnrealisablePerceptron,
    from_descriptor,
    risk_of_angle,
)
