"""Tiling systems on the integers: automata, sofic presentations, and a
compiler from nonnegative integer matrices to barbell/rack prototile sets."""

from tilesys.automaton import (
    AutomatonBudgetError,
    TilingAutomaton,
    build_automaton,
    check_window_condition,
    enumerate_window_tilings,
    membership_periodic,
    tiles_integers,
)
from tilesys.compiler import CompilerError, CompilerOutput, choose_parameters, compile_matrix
from tilesys.factorial import FactorialDigits, decode, encode
from tilesys.prototiles import (
    Prototile,
    PrototileError,
    PrototileSet,
    Tiling,
    normalize,
    parse_broken_word,
    render_broken_word,
)
from tilesys.sofic import (
    DeterministicPresentation,
    count_periodic,
    determinize,
    drop_subscripts,
    entropy,
    language_up_to,
    periodic_counts,
    presentation_of,
    renewal_presentation,
    spectral_radius,
)
from tilesys.verify import verify_dynamics, verify_structural

__version__ = "0.1.0"
