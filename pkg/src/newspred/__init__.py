"""newspred: dated, labeled news headlines in; market-predictability analyses out.

Modules:
  periods     aligned period series, horizon aggregation, state dummies
  corpus      headline/label ingestion, per-period counts, news ratios
  classify    lexicon and LLM labeling backends, term-frequency reports
  regression  OLS kernel with HAC covariances, interaction and macro links, PCA
  oos         recursive forecasts, benchmark comparison, combinations, CSFE paths
  alloc       mean-variance backtests with transaction costs
  novelty     embedding ingestion and similarity-based novelty scores
  simgen      synthetic data processes and the independent-oracle suite
  cli         the `newspred` command-line entry point
"""

__version__ = "0.1.0"

from .periods import (
    Frequency,
    Period,
    PeriodIndex,
    PeriodSeries,
    StateDummy,
    align,
    horizon_average,
    standardize,
    trailing_mean_dummy,
)
from .corpus import (
    HeadlineRecord,
    Label,
    LabelRecord,
    NewsRatios,
    PeriodCounts,
    aggregate,
    ratios,
    summary_stats,
)
from .regression import (
    DesignMatrix,
    RegressionFit,
    hodrick_covariance,
    interaction_regression,
    macro_link_regression,
    newey_west_covariance,
    ols,
    predictive_regression,
    principal_components,
)
from .oos import (
    CombinationMethod,
    ForecastPath,
    OosReport,
    combine,
    csfe_difference,
    msfe_adjusted,
    r2_os,
    recursive_forecast,
)
from .alloc import BacktestConfig, BacktestReport, backtest, weights_from_forecasts
from .novelty import novelty_score, period_mean, similarity_dummy
from .simgen import DgpConfig, oracle_suite, simulate_corpus, simulate_market
