"""
Esperimenti del runner. Ogni sottocomando è un adattatore sottile: riceve
l'ExperimentConfig, chiama le operazioni dei pacchetti di libreria e
restituisce righe metriche, riepilogo e violazioni degli invarianti.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from arrowlab.balance import ArrowAlignment, correlation_ceiling, entropy_balance, schrodinger_check
from arrowlab.constructions import (
    bures_neighborhood_sample,
    classical_correlated_demo,
    classical_correlated_state,
    decorrelating_unitary,
    near_product_mutual_information,
    near_product_state,
)
from arrowlab.search import UnitarySearchConfig, search_entropy_decreasing_unitary
from arrowlab.sweep import SweepGrid, default_local_hamiltonian, exchange_interaction, weak_coupling_sweep
from collision.machine import (
    ReservoirSpec,
    convergence_report,
    partial_swap_unitary,
    reverse_collisions,
    run_collisions,
    shuffled_transcript,
)
from fluctuation.crooks import (
    crooks_check,
    entropy_production_identity,
    jarzynski_check,
    matrix_element_symmetry,
    measurement_symmetry_check,
)
from fluctuation.heat import damping_heat, heat_flow_trial
from fluctuation.protocol import TwoPointProtocol, backward_distribution, forward_distribution, qubit_flip_protocol
from qcore.entropy import bures_distance, mutual_information, trace_distance
from qcore.sampling import RandomSource, haar_random_unitary, random_density_operator, random_hamiltonian
from qcore.states import QUBITS, DensityOperator, Hamiltonian, evolve, gibbs_state, tensor_product
from runner.config import ExperimentConfig
from runner.log_manager import get_logger
from runner.models import ExperimentOutcome

logger = get_logger("runner.experiments")

NAN = float("nan")

# collision machine: spostamento minimo in avanti e scarto minimo dell'inversione mescolata
MIN_DRIFT = 0.1
MIN_SHUFFLED_DISTANCE = 0.01


def _parallel_map(fn, items, workers: int) -> list:
    """Mappa sui trial; l'ordine delle righe segue l'indice, non il completamento."""
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _trial_sources(config: ExperimentConfig) -> list:
    return list(enumerate(RandomSource(config.seed).split(config.trials)))


def _random_product(layout, rng: RandomSource) -> DensityOperator:
    rho_s = random_density_operator(layout.dim_s, layout.dim_s, rng)
    rho_r = random_density_operator(layout.dim_r, layout.dim_r, rng)
    return tensor_product(rho_s, rho_r)


def _random_product_balance(layout, rng: RandomSource):
    state = _random_product(layout, rng)
    unitary = haar_random_unitary(layout.joint_dim, rng)
    report = entropy_balance(state, layout, unitary)
    _, ceiling = correlation_ceiling(evolve(state, unitary), layout)
    return report, ceiling


# ---------- arrow-lab ----------

def run_balance(config: ExperimentConfig) -> ExperimentOutcome:
    layout = config.layout
    tol = config.tolerances.balance

    def trial(item):
        index, rng = item
        return (index, *_random_product_balance(layout, rng))

    rows, failures = [], []
    census = {a.value: 0 for a in ArrowAlignment}
    for index, report, ceiling in _parallel_map(trial, _trial_sources(config), config.workers):
        alignment = schrodinger_check(report)
        census[alignment.value] += 1
        gap = report.total - report.mutual_info_final
        rows.append({"trial": index, **report.as_row(), "gap": gap, "ceiling": ceiling, "alignment": alignment.value})
        if report.total < -tol:
            failures.append(f"trial {index}: somma {report.total:.3e} < 0")
        if abs(gap) > tol:
            failures.append(f"trial {index}: |sum - I_final| = {abs(gap):.3e}")
        if report.mutual_info_final > ceiling + tol:
            failures.append(f"trial {index}: I_final oltre 2 min(S_S, S_R)")
    return ExperimentOutcome(rows=rows, summary={"alignment_census": census, "dims": config.dims}, failures=failures)


def run_near_product(config: ExperimentConfig) -> ExperimentOutcome:
    epsilons = [config.epsilon] if config.explicitly_set("epsilon") else config.epsilons
    unitary = decorrelating_unitary()
    tols = config.tolerances

    rows, failures = [], []
    for eps in epsilons:
        state = near_product_state(eps)
        report = entropy_balance(state, QUBITS, unitary)
        analytic = near_product_mutual_information(eps)
        product = DensityOperator.basis_state(4, 0)
        rows.append(
            {
                "epsilon": eps,
                **report.as_row(),
                "I_analytic": analytic,
                "bures_to_product": bures_distance(state, product),
                "alignment": schrodinger_check(report).value,
            }
        )
        if abs(report.mutual_info_initial - analytic) > tols.identity:
            failures.append(f"epsilon {eps}: I iniziale {report.mutual_info_initial!r} != {analytic!r}")
        if report.mutual_info_final > tols.identity:
            failures.append(f"epsilon {eps}: stato finale non prodotto (I = {report.mutual_info_final:.3e})")
        if abs(report.total + analytic) > tols.balance:
            failures.append(f"epsilon {eps}: somma {report.total!r} != -{analytic!r}")
    return ExperimentOutcome(rows=rows, failures=failures)


def run_decorrelate(config: ExperimentConfig) -> ExperimentOutcome:
    report = classical_correlated_demo()
    tol = config.tolerances.balance
    failures = []
    if abs(report.total + math.log(2)) > tol:
        failures.append(f"somma {report.total!r} != -ln 2")
    if report.mutual_info_final > config.tolerances.identity:
        failures.append("stato finale correlato")
    return ExperimentOutcome(rows=[report.as_row()], failures=failures)


def _search_config(config: ExperimentConfig, rng: RandomSource) -> UnitarySearchConfig:
    return UnitarySearchConfig(
        rng=rng,
        max_iterations=config.max_iterations,
        tolerance=config.tolerance,
        restarts=config.restarts,
        step=config.step,
    )


def _correlated_state(layout, rng: RandomSource, floor: float = 0.01) -> DensityOperator:
    while True:
        state = random_density_operator(layout.joint_dim, layout.joint_dim, rng)
        if mutual_information(state, layout) > floor:
            return state


def run_search(config: ExperimentConfig) -> ExperimentOutcome:
    layout = config.layout
    rows, failures = [], []

    if config.states == "demo":
        demos = [
            ("near_product", near_product_state(config.epsilon), -near_product_mutual_information(config.epsilon)),
            ("classical", classical_correlated_state(), -math.log(2)),
        ]
        for index, (label, state, bound) in enumerate(demos):
            result = search_entropy_decreasing_unitary(state, QUBITS, _search_config(config, RandomSource(config.seed)))
            rows.append(
                {
                    "trial": index,
                    "label": label,
                    "I_initial": mutual_information(state, QUBITS),
                    "achieved_sum": result.achieved_sum,
                    "feasible_bound": bound,
                    "decreased": result.decreased,
                    "best_restart": result.best_restart,
                }
            )
            if result.achieved_sum > bound + 1e-6:
                failures.append(f"{label}: somma {result.achieved_sum!r} sopra il punto ammissibile {bound!r}")
        return ExperimentOutcome(rows=rows, failures=failures)

    def trial(item):
        index, rng = item
        if config.states == "random":
            state_rng, search_rng = rng.split(2)
            state = _correlated_state(layout, state_rng)
            result = search_entropy_decreasing_unitary(state, layout, _search_config(config, search_rng))
            return [(index, NAN, state, NAN, result)]

        # stesso prodotto per tutti i raggi: la scansione in delta isola l'effetto della distanza
        product = _random_product(layout, rng)
        out = []
        for delta in config.delta:
            state_rng, search_rng = rng.split(2)
            state = bures_neighborhood_sample(product, layout, delta, state_rng)
            result = search_entropy_decreasing_unitary(state, layout, _search_config(config, search_rng))
            out.append((index, delta, state, bures_distance(state, product), result))
        return out

    for cases in _parallel_map(trial, _trial_sources(config), config.workers):
        for index, delta, state, distance, result in cases:
            rows.append(
                {
                    "trial": index,
                    "label": config.states,
                    "delta": delta,
                    "I_initial": mutual_information(state, layout),
                    "bures_to_product": distance,
                    "achieved_sum": result.achieved_sum,
                    "decreased": result.decreased,
                    "best_restart": result.best_restart,
                }
            )

    searches = len(rows)
    decreased = sum(1 for row in rows if row["decreased"])
    fraction = decreased / searches
    summary = {"decreased": decreased, "searches": searches, "fraction": fraction}
    if config.states == "bures":
        summary["mean_abs_sum_by_delta"] = {
            str(delta): float(np.mean([abs(r["achieved_sum"]) for r in rows if r["delta"] == delta]))
            for delta in config.delta
        }
    logger.info(f"ricerca {config.states}: diminuzione in {decreased}/{searches} casi")

    if config.states == "random" and fraction < 0.95:
        failures.append(f"diminuzione trovata solo in {decreased}/{searches} casi")
    if config.states == "bures" and decreased < searches:
        failures.append(f"diminuzione trovata in {decreased}/{searches} campioni di Bures")
    return ExperimentOutcome(rows=rows, summary=summary, failures=failures)


def run_schrodinger(config: ExperimentConfig) -> ExperimentOutcome:
    layout = config.layout

    def trial(item):
        index, rng = item
        return index, _random_product_balance(layout, rng)[0]

    rows = []
    census = {a.value: 0 for a in ArrowAlignment}
    for index, report in _parallel_map(trial, _trial_sources(config), config.workers):
        alignment = schrodinger_check(report)
        census[alignment.value] += 1
        rows.append({"trial": index, "case": "product", "dS_S": report.delta_s_s, "dS_R": report.delta_s_r,
                     "product": report.schrodinger_product, "alignment": alignment.value})

    exhibit = entropy_balance(near_product_state(config.epsilon), QUBITS, decorrelating_unitary())
    exhibit_alignment = schrodinger_check(exhibit)
    rows.append({"trial": config.trials, "case": "near_product", "dS_S": exhibit.delta_s_s,
                 "dS_R": exhibit.delta_s_r, "product": exhibit.schrodinger_product,
                 "alignment": exhibit_alignment.value})

    failures = []
    if config.epsilon > 0 and exhibit_alignment is not ArrowAlignment.ANTI_ALIGNED:
        failures.append(f"epsilon {config.epsilon}: attesa violazione antiAligned, ottenuto {exhibit_alignment.value}")
    frequencies = {k: v / config.trials for k, v in census.items()}
    return ExperimentOutcome(rows=rows, summary={"census": census, "frequencies": frequencies}, failures=failures)


def run_sweep(config: ExperimentConfig) -> ExperimentOutcome:
    grid = SweepGrid(tuple(config.couplings), tuple(config.sweep_epsilons), tuple(config.times))
    h_local = default_local_hamiltonian()
    cells = weak_coupling_sweep(h_local, h_local, exchange_interaction(config.interaction), grid)
    tol = config.tolerances.balance

    failures = []
    for cell in cells:
        if cell.coupling == 0 and abs(cell.min_sum) > tol:
            failures.append(f"g=0, eps={cell.epsilon}, t={cell.time}: somma {cell.min_sum:.3e} != 0")
        if cell.epsilon == 0 and cell.min_sum < -tol:
            failures.append(f"eps=0, g={cell.coupling}, t={cell.time}: somma {cell.min_sum:.3e} < 0")
    negative = sum(1 for c in cells if c.min_sum < -tol)
    summary = {"planned_cells": config.planned_cells, "negative_cells": negative, "interaction": config.interaction}
    return ExperimentOutcome(rows=[c.as_row() for c in cells], summary=summary, failures=failures)


# ---------- collision-machine ----------

def run_collide(config: ExperimentConfig) -> ExperimentOutcome:
    tols = config.tolerances
    gate = partial_swap_unitary(config.theta)
    ancilla = gibbs_state(Hamiltonian.diagonal([0.0, 1.0]), config.beta)
    spec = ReservoirSpec(ancilla, config.collisions)
    rows, failures, summary = [], [], {}

    # caso commutante: stati diagonali, contrazione chiusa cos^2(theta)
    excited = DensityOperator.basis_state(2, 1)
    trajectory, _ = run_collisions(excited, spec, gate, mode="reduced")
    for k, (distance, entropy) in enumerate(zip(trajectory.distances, trajectory.entropies)):
        rows.append({"phase": "commuting", "k": k, "distance": distance, "entropy": entropy,
                     "joint_entropy": NAN, "marginal_sum": NAN})
    expected = 2 * math.log(abs(math.cos(config.theta))) if math.cos(config.theta) != 0 else -math.inf
    if len(trajectory) >= 3:
        conv = convergence_report(trajectory)
        summary.update({"fitted_rate": conv.rate, "expected_rate": expected, "fit_residual": conv.residual,
                        "final_distance": conv.final_distance})
        if math.isfinite(expected) and not conv.exact and abs(conv.rate - expected) > tols.rate:
            failures.append(f"tasso {conv.rate!r} != ln cos^2(theta) = {expected!r}")

    # caso congiunto: stato iniziale casuale, inversione esatta e mescolata
    rng = RandomSource(config.seed)
    initial = random_density_operator(2, 2, rng)
    trajectory, transcript = run_collisions(initial, spec, gate, mode="joint")
    for k, (distance, entropy) in enumerate(zip(trajectory.distances, trajectory.entropies)):
        rows.append({"phase": "joint", "k": k, "distance": distance, "entropy": entropy,
                     "joint_entropy": trajectory.joint_entropies[k],
                     "marginal_sum": trajectory.marginal_entropy_sums[k]})

    recovered = reverse_collisions(transcript, spec)
    reversal = trace_distance(recovered, initial)
    drift = max(trace_distance(s, initial) for s in trajectory.system_states)
    joint_spread = max(trajectory.joint_entropies) - min(trajectory.joint_entropies)
    summary.update({"reversal_distance": reversal, "forward_drift": drift, "joint_entropy_spread": joint_spread})
    if reversal > tols.reversal:
        failures.append(f"inversione esatta fallita: distanza {reversal:.3e}")
    if config.collisions >= 1 and drift < MIN_DRIFT:
        failures.append(f"traiettoria in avanti ferma (distanza massima {drift:.3e} < {MIN_DRIFT})")
    if joint_spread > tols.reversal:
        failures.append(f"entropia congiunta non costante (escursione {joint_spread:.3e})")
    sums = trajectory.marginal_entropy_sums
    if any(b < a - tols.reversal for a, b in zip(sums, sums[1:])):
        failures.append("somma delle entropie marginali in diminuzione")

    if config.collisions >= 2:
        shuffled = reverse_collisions(shuffled_transcript(transcript, rng), spec)
        shuffled_distance = trace_distance(shuffled, initial)
        summary["shuffled_distance"] = shuffled_distance
        if shuffled_distance <= MIN_SHUFFLED_DISTANCE:
            failures.append(f"inversione mescolata riuscita (distanza {shuffled_distance:.3e}): l'ordine degli urti non conta")
    logger.info(
        f"collide: {config.collisions} urti, inversione {reversal:.3e}, "
        f"mescolata {summary.get('shuffled_distance', NAN):.3e}, spostamento {drift:.3e}"
    )
    return ExperimentOutcome(rows=rows, summary=summary, failures=failures)


# ---------- fluctuation ----------

def _random_protocol(dim: int, beta: float, rng: RandomSource) -> TwoPointProtocol:
    return TwoPointProtocol(random_hamiltonian(dim, rng), random_hamiltonian(dim, rng), haar_random_unitary(dim, rng), beta)


def _crooks_case(protocol: TwoPointProtocol) -> tuple:
    pf, pb = forward_distribution(protocol), backward_distribution(protocol)
    kl, sigma = entropy_production_identity(pf, pb, protocol.beta, protocol.delta_f)
    return crooks_check(protocol), kl, sigma


def run_crooks(config: ExperimentConfig) -> ExperimentOutcome:
    dim = config.layout.joint_dim
    tol = config.tolerances.crooks

    def trial(item):
        index, rng = item
        return (index, "random", config.beta, *_crooks_case(_random_protocol(dim, config.beta, rng)))

    cases = _parallel_map(trial, _trial_sources(config), config.workers)
    # caso risolto a mano in coda: rapporti 3 e 1/3, sigma medio ln(3)/2
    cases.append((config.trials, "pauli_x", 1.0, *_crooks_case(qubit_flip_protocol())))

    rows, failures = [], []
    for index, case, beta, report, kl, sigma in cases:
        rows.append({"trial": index, "case": case, "beta": beta, "delta_f": report.delta_f, "pairs": len(report.pairs),
                     "max_ratio": max((p.ratio for p in report.pairs), default=NAN),
                     "max_rel_deviation": report.max_relative_deviation, "jarzynski_lhs": report.jarzynski_lhs,
                     "jarzynski_rhs": math.exp(-beta * report.delta_f), "kl": kl, "avg_sigma": sigma})
        if not report.passed(tol):
            failures.append(f"trial {index}: Crooks violata (scarto {report.max_relative_deviation:.3e})")
        if abs(kl - sigma) > tol or min(kl, sigma) < -1e-12:
            failures.append(f"trial {index}: KL {kl!r} != sigma medio {sigma!r}")

    flip = rows[-1]
    if abs(flip["max_ratio"] - 3.0) > tol or abs(flip["avg_sigma"] - 0.5 * math.log(3)) > tol:
        failures.append(f"pauli_x: rapporto {flip['max_ratio']!r}, sigma {flip['avg_sigma']!r} (attesi 3 e ln(3)/2)")
    return ExperimentOutcome(rows=rows, failures=failures)


def run_jarzynski(config: ExperimentConfig) -> ExperimentOutcome:
    dim = config.layout.joint_dim
    tol = config.tolerances.crooks

    def trial(item):
        index, rng = item
        protocol = _random_protocol(dim, config.beta, rng)
        return index, jarzynski_check(forward_distribution(protocol), protocol.beta, protocol.delta_f)

    rows, failures = [], []
    for index, (lhs, rhs) in _parallel_map(trial, _trial_sources(config), config.workers):
        rel = abs(lhs - rhs) / rhs
        rows.append({"trial": index, "lhs": lhs, "rhs": rhs, "rel_error": rel})
        if rel > tol:
            failures.append(f"trial {index}: Jarzynski violata (errore relativo {rel:.3e})")
    return ExperimentOutcome(rows=rows, failures=failures)


def _random_projector(dim: int, rng: RandomSource) -> np.ndarray:
    v = rng.complex_gaussian(dim)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def run_symmetry(config: ExperimentConfig) -> ExperimentOutcome:
    dim = config.layout.joint_dim
    tol = config.tolerances.symmetry

    def trial(item):
        index, rng = item
        p, q = _random_projector(dim, rng), _random_projector(dim, rng)
        forward, backward = measurement_symmetry_check(p, q, haar_random_unitary(dim, rng))
        elem_mn, elem_nm = matrix_element_symmetry(
            random_hamiltonian(dim, rng).matrix, rng.complex_gaussian(dim), rng.complex_gaussian(dim)
        )
        return index, forward, backward, elem_mn, elem_nm

    rows, failures = [], []
    for index, forward, backward, elem_mn, elem_nm in _parallel_map(trial, _trial_sources(config), config.workers):
        rows.append({"trial": index, "forward": forward, "backward": backward, "elem_mn": elem_mn, "elem_nm": elem_nm})
        if abs(forward - backward) > tol:
            failures.append(f"trial {index}: probabilità condizionate asimmetriche ({abs(forward - backward):.3e})")
        if abs(elem_mn - elem_nm) > tol * max(1.0, elem_mn):
            failures.append(f"trial {index}: elementi di matrice asimmetrici")
    return ExperimentOutcome(rows=rows, failures=failures)


def run_heatflow(config: ExperimentConfig) -> ExperimentOutcome:
    tol = config.tolerances.balance

    def trial(item):
        index, rng = item
        g = rng.generator
        beta_s, beta_r = g.uniform(0.2, 3.0, size=2)
        omega = g.uniform(0.5, 2.0)
        t = g.uniform(0.2, 1.4)
        return index, heat_flow_trial(float(beta_s), float(beta_r), float(omega), float(t))

    rows, failures = [], []
    for index, result in _parallel_map(trial, _trial_sources(config), config.workers):
        temps = result.temperatures
        clausius = temps.clausius_lhs if temps else result.balance.total
        rows.append({"trial": index, "beta_S": result.beta_s, "beta_R": result.beta_r,
                     "dU_S": result.delta_u_s, "dU_R": result.delta_u_r,
                     "dS_S": result.balance.delta_s_s, "dS_R": result.balance.delta_s_r,
                     "T_S": temps.t_s if temps else NAN, "T_R": temps.t_r if temps else NAN,
                     "clausius": clausius, "hot_dU": result.hot_energy_change})
        if result.hot_energy_change > 1e-12:
            failures.append(f"trial {index}: il sottosistema più caldo guadagna energia ({result.hot_energy_change:.3e})")
        if clausius < -tol:
            failures.append(f"trial {index}: Clausius violata ({clausius:.3e})")
    return ExperimentOutcome(rows=rows, failures=failures)


def run_damping(config: ExperimentConfig) -> ExperimentOutcome:
    h_final = Hamiltonian.diagonal([0.0, 1.0])
    beta = config.beta
    thermal = gibbs_state(h_final, beta)
    p0 = float(thermal.matrix[0, 0].real)
    cases = [
        ("thermal", thermal, 0.0),
        ("maximally_mixed", DensityOperator.maximally_mixed(2), 0.5 * math.log(0.5 / p0) + 0.5 * math.log(0.5 / (1 - p0))),
        ("ground", DensityOperator.basis_state(2, 0), -math.log(p0)),
        ("excited", DensityOperator.basis_state(2, 1), -math.log(1 - p0)),
    ]
    for index, rng in _trial_sources(config):
        cases.append((f"random_{index}", random_density_operator(2, 2, rng), NAN))

    rows, failures = [], []
    for label, state, analytic in cases:
        value = damping_heat(state, h_final, beta)
        rows.append({"label": label, "damping_heat": value, "analytic": analytic})
        if value < 0:
            failures.append(f"{label}: calore negativo {value!r}")
        if not math.isnan(analytic) and abs(value - analytic) > config.tolerances.identity:
            failures.append(f"{label}: {value!r} != {analytic!r}")
    return ExperimentOutcome(rows=rows, failures=failures)


EXPERIMENTS = {
    "balance": run_balance,
    "near-product": run_near_product,
    "decorrelate": run_decorrelate,
    "search": run_search,
    "schrodinger": run_schrodinger,
    "sweep": run_sweep,
    "collide": run_collide,
    "crooks": run_crooks,
    "jarzynski": run_jarzynski,
    "symmetry": run_symmetry,
    "heatflow": run_heatflow,
    "damping": run_damping,
}
