"""The per-slot simulation loop and its record types."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..channel import Direction, LinkState, channel_gain, draw_channel, transmit, update_aoi
from ..control import KalmanState, compute_action, kalman_measurement_update, kalman_predict_update
from ..estimation import mmse_estimate, mmse_gain
from ..numerics import sym_sqrt_factor
from ..plant import LtiSystem, draw_plant_noise, is_blown_up, step
from ..prediction import GprMode, SampleKind, TrainingSet, ingest, predict_or_prior
from ..scheduler import (
    SlotDecision,
    VirtualQueues,
    allocate_power,
    aoi_auxiliary,
    baseline_event_triggered,
    baseline_event_triggered_fdma,
    baseline_ideal,
    baseline_opportunistic,
    baseline_round_robin,
    power_auxiliary,
    schedule_slot,
    slot_scores,
    update_queues,
)
from ..stability import stability_bounds
from .config import RunConfig

STREAMS = ("plant", "ul_channel", "dl_channel", "ul_noise", "dl_noise", "mirror")
LOOP_CASES = {(0, 0): "open", (1, 0): "sensing", (0, 1): "actuating", (1, 1): "closed"}
QUEUE_FIELDS = ("q_beta_u", "q_beta_d", "q_p_u", "q_p_d", "q_c_u", "q_c_d", "q_c")


def loop_case(xi_u: int, xi_d: int) -> str:
    return LOOP_CASES[(int(xi_u), int(xi_d))]


def system_streams(seed: int, system: int) -> dict[str, np.random.Generator]:
    """Independent generators for one system, keyed by purpose."""
    return {
        name: np.random.default_rng(np.random.SeedSequence([int(seed), int(system), j]))
        for j, name in enumerate(STREAMS)
    }


@dataclass
class StepRecord:
    run_seed: int
    slot: int
    system: int
    state: np.ndarray
    theta_abs: float
    action: np.ndarray
    alpha_u: int
    alpha_d: int
    xi_u: int
    xi_d: int
    beta_u: int
    beta_d: int
    p_u: float
    p_d: float
    loop_case: str
    queues: dict
    gpr_var_u_mean: float
    gpr_var_d_mean: float
    blown_up: int = 0
    scheduler: str = ""


@dataclass
class SystemSummary:
    system: int
    theta_trace: list
    tail_mean_theta: float
    stable: bool
    rate_u: float
    rate_d: float
    mean_power_u: float
    mean_power_d: float
    beta_u_trace: list
    beta_d_trace: list
    blown_up: bool
    blown_slot: int | None


@dataclass
class RunSummary:
    scheduler: str
    seed: int
    M: int
    K: int
    tail: int
    systems: list[SystemSummary]
    mean_theta_trace: list = field(default_factory=list)
    label: str | None = None

    @property
    def n_stable(self) -> int:
        return sum(s.stable for s in self.systems)

    @property
    def all_diverged(self) -> bool:
        return all(s.blown_up for s in self.systems)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_stable"] = self.n_stable
        d["all_diverged"] = self.all_diverged
        return d


@dataclass
class _Runtime:
    """Mutable per-system state of one run."""

    x: np.ndarray
    ul: LinkState
    dl: LinkState
    streams: dict
    queues: VirtualQueues = field(default_factory=VirtualQueues)
    state_gpr: TrainingSet | None = None
    mirror_gpr: TrainingSet | None = None
    action_gpr: TrainingSet | None = None
    held_state: np.ndarray | None = None
    held_action: np.ndarray | None = None
    believed_action: np.ndarray | None = None
    last_xc: np.ndarray | None = None
    kf: KalmanState | None = None
    blown: bool = False
    blown_slot: int | None = None


class Simulation:
    """One run of ``M`` identical plants sharing one UL and one DL channel.

    Parameters
    ----------
    config : RunConfig
        Fully validated configuration.
    """

    def __init__(self, config: RunConfig):
        self.cfg = config
        self.sys: LtiSystem = config.build_system()
        self.params = config.scheduler_params()
        self.kp = config.gpr.kernel()
        self.N0 = config.channel.N0
        self.th_u = 10 ** (config.channel.snr_threshold_db_u / 10)
        self.th_d = 10 ** (config.channel.snr_threshold_db_d / 10)
        self.s_u = config.channel.source_scale_u
        self.s_d = config.channel.source_scale_d
        self.theta_index = min(config.plant.theta_index, self.sys.D - 1)
        self.records: list[StepRecord] = []
        D, P = self.sys.D, self.sys.P
        x0 = config.initial_state(D)
        mode = GprMode(config.gpr.mode)
        seeds = config.system_seeds or (config.seed,) * config.M
        self.rt: list[_Runtime] = []
        for i in range(config.M):
            r = _Runtime(
                x=x0.copy(),
                ul=LinkState(Direction.UL, D, snr_threshold=self.th_u, noise_floor=self.N0),
                dl=LinkState(Direction.DL, P, snr_threshold=self.th_d, noise_floor=self.N0),
                streams=system_streams(seeds[i], i),
                state_gpr=TrainingSet(D, mode, config.gpr.window),
                mirror_gpr=TrainingSet(P, mode, config.gpr.window),
                action_gpr=TrainingSet(P, mode, config.gpr.window),
                held_state=np.zeros(D),
                held_action=np.zeros(P),
                believed_action=np.zeros(P),
                last_xc=np.zeros(D),
                # the nominal initial condition is known to the model-based baselines
                kf=KalmanState(mean=x0.copy(), cov=self.sys.W.copy()),
            )
            self.rt.append(r)

    # -- scheduling stage -------------------------------------------------
    def _schedule_proposed(self, k, alive, preds):
        M, prm = self.cfg.M, self.params
        dec = SlotDecision.idle(M)
        feas_u = np.zeros(M, dtype=bool)
        feas_d = np.zeros(M, dtype=bool)
        ctx = []
        for i, r in enumerate(self.rt):
            if not alive[i]:
                ctx.append(None)
                continue
            p_u, feas_u[i] = allocate_power(r.queues.q_p_u, r.ul.H, self.N0, self.th_u, prm.P_max_u)
            p_d, feas_d[i] = allocate_power(r.queues.q_p_d, r.dl.H, self.N0, self.th_d, prm.P_max_d)
            dec.p_u[i], dec.p_d[i] = p_u, p_d
            _, V_u = mmse_gain(r.ul.H, p_u if feas_u[i] else prm.P_max_u, self.N0)
            _, V_d = mmse_gain(r.dl.H, p_d if feas_d[i] else prm.P_max_d, self.N0)
            V_u, V_d = self.s_u**2 * V_u, self.s_d**2 * V_d
            px, pm, _ = preds[i]
            bounds = stability_bounds(self.sys, px.mean, px.cov, pm.cov, V_u, V_d)
            ctx.append((bounds, V_u, V_d))
        dec.gamma_beta_u = np.array([aoi_auxiliary(r.queues.q_beta_u, prm) for r in self.rt])
        dec.gamma_beta_d = np.array([aoi_auxiliary(r.queues.q_beta_d, prm) for r in self.rt])
        dec.gamma_p_u = np.array([power_auxiliary(r.queues.q_p_u, prm, prm.P_max_u) for r in self.rt])
        dec.gamma_p_d = np.array([power_auxiliary(r.queues.q_p_d, prm, prm.P_max_d) for r in self.rt])
        w1, w2, w3 = slot_scores(
            [r.queues for r in self.rt], [r.ul.beta for r in self.rt], [r.dl.beta for r in self.rt],
            dec.p_u, dec.p_d,
        )
        dec.alpha_u, dec.alpha_d = schedule_slot(w1, w2, w3, feas_u, feas_d)
        return dec, ctx

    def _schedule_baseline(self, k, alive, kf_priors):
        name, M = self.cfg.scheduler, self.cfg.M
        dec = SlotDecision.idle(M)
        if name == "round_robin":
            au, ad = baseline_round_robin(k, alive)
        elif name == "opportunistic":
            au, ad = baseline_opportunistic(
                [channel_gain(r.ul.H) for r in self.rt], [channel_gain(r.dl.H) for r in self.rt], alive
            )
        elif name in ("event_triggered", "event_triggered_fdma"):
            disc = [float(np.linalg.norm(kf_priors[i].mean - r.last_xc)) for i, r in enumerate(self.rt)]
            fn = baseline_event_triggered if name == "event_triggered" else baseline_event_triggered_fdma
            au, ad = fn(disc, self.cfg.sched.trigger_threshold, alive)
        else:
            au, ad = baseline_ideal(alive)
        dec.alpha_u, dec.alpha_d = au, ad
        dec.p_u = au * self.params.P_max_u
        dec.p_d = ad * self.params.P_max_d
        return dec

    # -- main loop --------------------------------------------------------
    def run(self) -> RunSummary:
        cfg, sys = self.cfg, self.sys
        proposed = cfg.scheduler == "stability_aware"
        ideal = cfg.scheduler == "ideal"
        uses_kf = cfg.scheduler.startswith("event_triggered")
        for k in range(cfg.K):
            noises = []
            for r in self.rt:
                # draws happen for every system every slot so streams stay aligned
                r.ul.H = draw_channel(sys.D, r.streams["ul_channel"], cfg.channel.variance)
                r.dl.H = draw_channel(sys.P, r.streams["dl_channel"], cfg.channel.variance)
                noises.append(draw_plant_noise(sys, r.streams["plant"]))
            alive = np.array([not r.blown for r in self.rt])

            preds = [None] * cfg.M
            kf_priors = [None] * cfg.M
            if proposed:
                preds = [
                    (predict_or_prior(r.state_gpr, k, self.kp), predict_or_prior(r.mirror_gpr, k, self.kp),
                     predict_or_prior(r.action_gpr, k, self.kp))
                    for r in self.rt
                ]
                dec, ctx = self._schedule_proposed(k, alive, preds)
            else:
                if uses_kf:
                    kf_priors = [kalman_predict_update(sys, r.kf, r.believed_action) for r in self.rt]
                dec = self._schedule_baseline(k, alive, kf_priors)

            for i, r in enumerate(self.rt):
                if r.blown:
                    self._record(k, i, r, np.zeros(sys.P), dec, preds[i], frozen=True)
                    continue
                x = r.x
                # uplink
                r.ul.alpha, r.ul.power, r.ul.xi = int(dec.alpha_u[i]), float(dec.p_u[i]), 0
                x_bar = None
                V_u = None
                if ideal and r.ul.alpha:
                    r.ul.xi, x_bar = 1, x.copy()
                elif r.ul.alpha:
                    y, _ = transmit(r.ul, x / self.s_u, r.streams["ul_noise"])
                    if r.ul.xi:
                        est = mmse_estimate(y, r.ul.H, r.ul.power, self.N0)
                        x_bar, V_u = self.s_u * est.estimate, self.s_u**2 * est.error_cov
                # controller
                if proposed:
                    px = preds[i][0]
                    x_c = x_bar if r.ul.xi else px.mean
                    ingest(r.state_gpr, k, x_c, SampleKind.OBSERVED if r.ul.xi else SampleKind.PREDICTED)
                elif uses_kf:
                    prior = kf_priors[i]
                    r.kf = kalman_measurement_update(prior, x_bar, V_u) if r.ul.xi else prior
                    x_c = x_bar if r.ul.xi else prior.mean
                else:
                    if r.ul.xi:
                        r.held_state = x_bar
                    x_c = r.held_state
                r.last_xc = np.asarray(x_c, dtype=float)
                u_d = compute_action(sys, x_c)
                # downlink
                r.dl.alpha, r.dl.power, r.dl.xi = int(dec.alpha_d[i]), float(dec.p_d[i]), 0
                u_bar = None
                if ideal and r.dl.alpha:
                    r.dl.xi, u_bar = 1, u_d.copy()
                elif r.dl.alpha:
                    y, _ = transmit(r.dl, u_d / self.s_d, r.streams["dl_noise"])
                    if r.dl.xi:
                        est = mmse_estimate(y, r.dl.H, r.dl.power, self.N0)
                        u_bar = self.s_d * est.estimate
                        if proposed:
                            v = self.s_d * sym_sqrt_factor(est.error_cov) @ r.streams["mirror"].standard_normal(sys.P)
                            ingest(r.mirror_gpr, k, u_d + v)
                if proposed and not r.dl.xi:
                    ingest(r.mirror_gpr, k, preds[i][1].mean, SampleKind.PREDICTED)
                # actuator
                if proposed:
                    u_a = u_bar if r.dl.xi else preds[i][2].mean
                    ingest(r.action_gpr, k, u_a, SampleKind.OBSERVED if r.dl.xi else SampleKind.PREDICTED)
                else:
                    if r.dl.xi:
                        r.held_action = u_bar
                    u_a = r.held_action
                if r.dl.xi:
                    r.believed_action = u_d
                u_a = np.asarray(u_a, dtype=float)
                # plant, AoI, queues
                r.x = step(sys, x, u_a, noises[i])
                update_aoi(r.ul, k)
                update_aoi(r.dl, k)
                if proposed:
                    bounds = ctx[i][0]
                    r.queues = update_queues(
                        r.queues,
                        gamma_beta_u=dec.gamma_beta_u[i], gamma_beta_d=dec.gamma_beta_d[i],
                        gamma_p_u=dec.gamma_p_u[i], gamma_p_d=dec.gamma_p_d[i],
                        beta_u=r.ul.beta, beta_d=r.dl.beta,
                        alpha_u=r.ul.alpha, alpha_d=r.dl.alpha, p_u=r.ul.power, p_d=r.dl.power,
                        bound_u=bounds.m_u, bound_d=bounds.m_d, bound_ud=bounds.m_ud,
                    )
                self._record(k, i, r, u_a, dec, preds[i], state=x)
                if is_blown_up(r.x):
                    r.blown, r.blown_slot = True, k
        return self.summarize()

    def _record(self, k, i, r, u_a, dec, pred, state=None, frozen=False):
        x = r.x if state is None else state
        if frozen:
            au = ad = xu = xd = 0
            pu = pd = 0.0
        else:
            au, ad, xu, xd = r.ul.alpha, r.dl.alpha, r.ul.xi, r.dl.xi
            pu, pd = r.ul.alpha * r.ul.power, r.dl.alpha * r.dl.power
        if pred is None:
            vu = vd = float("nan")
        else:
            vu, vd = float(np.mean(pred[0].var)), float(np.mean(pred[2].var))
        self.records.append(
            StepRecord(
                run_seed=self.cfg.seed, slot=k, system=i, state=np.array(x, dtype=float),
                theta_abs=float(abs(x[self.theta_index])), action=np.atleast_1d(u_a).astype(float),
                alpha_u=int(au), alpha_d=int(ad), xi_u=int(xu), xi_d=int(xd),
                beta_u=int(r.ul.beta), beta_d=int(r.dl.beta), p_u=float(pu), p_d=float(pd),
                loop_case=loop_case(xu, xd), queues=r.queues.as_dict(),
                gpr_var_u_mean=vu, gpr_var_d_mean=vd, blown_up=int(frozen),
                scheduler=self.cfg.scheduler,
            )
        )

    def summarize(self) -> RunSummary:
        return summarize_records(self.records, self.cfg, self.rt)


def summarize_records(records, cfg: RunConfig, runtimes=None) -> RunSummary:
    M, K, tail = cfg.M, cfg.K, min(cfg.tail, cfg.K)
    theta = np.full((M, K), np.nan)
    xi = np.zeros((2, M, K))
    power = np.zeros((2, M, K))
    beta = np.zeros((2, M, K), dtype=int)
    blown = np.zeros(M, dtype=bool)
    for rec in records:
        theta[rec.system, rec.slot] = rec.theta_abs
        xi[:, rec.system, rec.slot] = rec.xi_u, rec.xi_d
        power[:, rec.system, rec.slot] = rec.p_u, rec.p_d
        beta[:, rec.system, rec.slot] = rec.beta_u, rec.beta_d
        blown[rec.system] |= bool(rec.blown_up)
    systems = []
    for i in range(M):
        t_tail = theta[i, K - tail:]
        bl_slot = None if runtimes is None else runtimes[i].blown_slot
        diverged = bool(blown[i] or bl_slot is not None)
        systems.append(
            SystemSummary(
                system=i,
                theta_trace=theta[i].tolist(),
                tail_mean_theta=float(np.mean(t_tail)),
                stable=bool(not diverged and np.all(t_tail <= cfg.stable_threshold)),
                rate_u=float(xi[0, i].sum() / K),
                rate_d=float(xi[1, i].sum() / K),
                mean_power_u=float(power[0, i].mean()),
                mean_power_d=float(power[1, i].mean()),
                beta_u_trace=beta[0, i].tolist(),
                beta_d_trace=beta[1, i].tolist(),
                blown_up=diverged,
                blown_slot=bl_slot,
            )
        )
    with np.errstate(invalid="ignore"):
        mean_trace = np.mean(theta, axis=0)
    return RunSummary(
        scheduler=cfg.scheduler, seed=cfg.seed, M=M, K=K, tail=tail, systems=systems,
        mean_theta_trace=mean_trace.tolist(), label=cfg.label,
    )


def run(config: RunConfig) -> tuple[RunSummary, list[StepRecord]]:
    """Simulate one configuration; returns the summary and the record stream."""
    sim = Simulation(config)
    summary = sim.run()
    return summary, sim.records
