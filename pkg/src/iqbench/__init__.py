"""iqbench: measure a machine IQ over randomly generated test worlds.

An agent lives one bounded life (games x steps) in each test world, is
scored by the mean of its game rewards (win 1, draw 1/2, loss 0), and its
IQ is the mean score over the suite.  The package ships the world
generator (nondeterministic Turing machines of fixed size), reference
agents, the qualification threshold, rival discounted measures, fatal
error analysis, a report/figure CLI, and a session service that puts a
human on the same scale.
"""

__version__ = "0.1.0"

from .world import (LifeConfig, LifeRecord, GameOutcome, Observation, Outcome, Signal,
                    reward_of, run_life, success)
from .ndtm import (MachineGenParams, MachineWorld, Suite, WorldMachine, generate_machine,
                   generate_suite, read_suite_file, swap_closed, swap_win_loss,
                   write_suite_file)
from .agents import (BayesOptimalAgent, CrammingAgent, DeadAgent, FrequencyLearner,
                     RandomAgent, RetardedAgent, make_agent_factory)
from .metrics import (ConvergenceSeries, IqReport, estimate_iq, limit_iq_series,
                      liminf_limsup_new_iq, oscillation_series, qualifies_as_ai)
from .altmeasures import (DiscountParams, corrected_universal_iq, discounted_value,
                          log2_machine_count, monotone_wrapper, naive_universal_terms,
                          separation_report)
from .fatal import audit_life, find_fatal_groups, optimal_values
from .worlds import (ExplicitWorld, WorldFamily, bitstream_world, make_bitstream,
                     oracle_bandit_family, oscillating_world, tictactoe_world,
                     trap_world)
