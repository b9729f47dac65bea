"""Walrasian equilibrium, gauge-invariant market observables and a barter simulator."""

from .arbitrage import ArbitrageCycle, arbitrage_search, market_graph
from .core import (GaugeElement, GoodsRegistry, adjoint, apply_gauge, contract_value,
                   gauge_norm, normalize_prices)
from .equilibrium import (Economy, EquilibriumResult, Firm, Household, cobb_douglas_demand,
                          edgeworth_economy, edgeworth_equilibrium_oracle, excess_demand,
                          firm_supply, household_income, solve_equilibrium, tatonnement_step,
                          walras_residual)
from .errors import *  # noqa: F401,F403
from .gauge import (UNKNOWN, CycleCurvature, TradeOp, action_cycles, action_trade,
                    curvature_matrix, cycle_curvature, local_ratio_Q, operation_matrix,
                    total_trade_action, trade_ratio_O, wbw_extract_prices, wbw_from_prices,
                    wbw_gauge_transform, wbw_is_complete, wbw_is_consistent,
                    wbw_projection_defect, wbw_valuation)
from .holonomy import (EconomicHistory, TangentPair, curvature_form_F, holonomy_covariance_check,
                       log_holonomy, path_holonomy, plaquette_check, read_history_csv,
                       write_history_csv)
from .io import dumps, emit_summary
from .pareto import DiscreteScenario, enumerate_pareto_allocations, gallery_slots, indifferent_drinks
from .scenario import Scenario, parse_scenario
from .sim import (AgentSpec, SimConfig, TradeLedger, init_simulation, negotiate_trade,
                  price_dispersion, run_production, run_simulation, sample_cycle_curvatures, tick,
                  update_beliefs)

__version__ = "0.1.0"
