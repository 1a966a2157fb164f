"""Mission phase logic: per-step command dispatch, transitions, telemetry.

A mission runs through at most four phases: an optional mid-course phase
(constant-command arc onto the initiation circle), circle following around
to the path start, close-range path tracking, and an absorbing done state.
The phase is classified once at mission start: mid-course when the vehicle
is at least twice the start curvature radius away from the path start,
otherwise the close-range law applies immediately.

Each integration step emits exactly one telemetry record.  Cross-track
error follows the phase convention: distance to the path start point during
mid-course, distance to the closest path point otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import guidance, midcourse as mc, optimizer as opt, vehicle
from .geom import heading_vector, signed_angle
from .metrics import PHASE_CIRCLE, PHASE_CLOSE, PHASE_MIDCOURSE, RunRecord
from .path import ReferencePath, curvature_radius
from .vehicle import VehicleState

CONTROLLER_BASELINE = "baseline"
CONTROLLER_PROPOSED = "proposed"


@dataclass(frozen=True)
class MissionConfig:
    """Everything a single mission needs besides the path and initial state."""

    lookahead: float = 10.0
    initiation_radius: float | None = None  # default: lookahead / 2
    dt: float = 0.01
    controller: str = CONTROLLER_PROPOSED
    k1: float = 1.0
    k2: float = 0.0
    optimizer: opt.OptimizerSettings | None = None  # None: gains stay fixed
    arrive_pos_tol: float = 0.25
    arrive_heading_tol: float = math.radians(2.0)
    end_s_tol: float = 0.1
    a_max: float | None = None
    max_time: float = 1800.0

    def __post_init__(self):
        if not self.lookahead > 0.0:
            raise ValueError("lookahead must be positive")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.controller not in (CONTROLLER_BASELINE, CONTROLLER_PROPOSED):
            raise ValueError(f"unknown controller {self.controller!r}")

    @property
    def radius(self) -> float:
        return self.initiation_radius if self.initiation_radius is not None else self.lookahead / 2.0


@dataclass
class Midcourse:
    solution: mc.ContactSolution
    circle: mc.InitiationCircle


@dataclass
class CircleFollow:
    circle: mc.InitiationCircle


@dataclass
class CloseRange:
    s_min: float
    s_proj: float | None = None
    coast_left: int | None = None


@dataclass
class Done:
    pass


Phase = Midcourse | CircleFollow | CloseRange | Done


def classify_phase(state: VehicleState, path: ReferencePath, r0: float) -> str:
    """Mid-course when the vehicle is at least 2 r0 from the path start."""
    sx, sy = path.start.position
    d = math.hypot(state.x - sx, state.y - sy)
    return PHASE_MIDCOURSE if d >= 2.0 * r0 else PHASE_CLOSE


class Mission:
    """Owns one vehicle's run along one path; not shared across threads."""

    def __init__(self, path: ReferencePath, state: VehicleState, config: MissionConfig):
        self.path = path
        self.state = state
        self.config = config
        self.record = RunRecord(controller=config.controller)
        self.k1 = config.k1
        self.k2 = config.k2
        self._next_opt_t = -math.inf

        r0 = curvature_radius(path.point_at(0.0))
        if classify_phase(state, path, r0) == PHASE_MIDCOURSE:
            candidates = mc.candidate_circles(path, config.radius)
            circle, solution = mc.select_circle(
                state.position, state.heading, candidates, state.speed
            )
            self.phase: Phase = Midcourse(solution, circle)
        else:
            self.phase = CloseRange(s_min=0.0)

    # ------------------------------------------------------------------

    @property
    def done(self) -> bool:
        return isinstance(self.phase, Done)

    def run(self) -> RunRecord:
        while not self.done:
            if self.state.t > self.config.max_time:
                self.record.timed_out = True
                break
            self.step()
        return self.record

    def step(self) -> tuple[float, Phase]:
        """Advance one integration step; returns the applied command and phase."""
        if isinstance(self.phase, Done):
            return 0.0, self.phase

        self._check_transitions()
        cmd, cte, label = self._command_and_cte()
        self.record.append(
            self.state.t, self.state.x, self.state.y, self.state.heading,
            cmd, cte, label, self.k1, self.k2,
        )
        self.state = vehicle.step(self.state, cmd, self.config.dt, self.config.a_max)
        self._post_step()
        return cmd, self.phase

    # ------------------------------------------------------------------

    def _check_transitions(self) -> None:
        cfg = self.config
        if isinstance(self.phase, Midcourse):
            sol, circle = self.phase.solution, self.phase.circle
            d = math.hypot(self.state.x - sol.w[0], self.state.y - sol.w[1])
            if d <= cfg.arrive_pos_tol:
                tang = circle.tangent_at(sol.w)
                err = abs(signed_angle(heading_vector(self.state.heading), tang))
                if err <= cfg.arrive_heading_tol:
                    self.phase = CircleFollow(circle)
        if isinstance(self.phase, CircleFollow):
            start = self.path.start
            d = math.hypot(self.state.x - start.position[0], self.state.y - start.position[1])
            if d <= cfg.arrive_pos_tol:
                err = abs(signed_angle(heading_vector(self.state.heading), start.tangent))
                if err <= cfg.arrive_heading_tol:
                    self.phase = CloseRange(s_min=0.0)

    def _command_and_cte(self) -> tuple[float, float, str]:
        cfg = self.config
        if isinstance(self.phase, Midcourse):
            sx, sy = self.path.start.position
            cte = math.hypot(self.state.x - sx, self.state.y - sy)
            return mc.midcourse_command(self.state, self.phase.solution), cte, PHASE_MIDCOURSE

        if isinstance(self.phase, CircleFollow):
            _, cte = self.path.project(self.state.position)
            cmd = mc.circle_follow_command(self.state, self.phase.circle, cfg.lookahead)
            return cmd, cte, PHASE_CIRCLE

        phase = self.phase
        assert isinstance(phase, CloseRange)

        if phase.coast_left is not None:
            pp, cte = self.path.project(self.state.position, s_hint=phase.s_proj)
            phase.s_proj = pp.s
            return 0.0, cte, PHASE_CLOSE

        if cfg.controller == CONTROLLER_PROPOSED and cfg.optimizer is not None:
            if self.state.t >= self._next_opt_t:
                res = opt.optimize_gains(
                    self.state, self.path, phase.s_min, cfg.optimizer,
                    cfg.lookahead, cfg.dt, s_proj=phase.s_proj,
                )
                self.k1, self.k2 = res.k1, res.k2
                self._next_opt_t = self.state.t + res.horizon

        if cfg.controller == CONTROLLER_BASELINE:
            cmd, la = guidance.baseline_step(self.state, self.path, phase.s_min, cfg.lookahead)
            pp, cte = guidance.track_projection(
                self.state, self.path, phase.s_min, cfg.lookahead, phase.s_proj
            )
            phase.s_proj = pp.s
            phase.s_min = max(phase.s_min, la.point.s)
            ends = la.end_of_path or la.point.s >= self.path.total_length - cfg.end_s_tol
            if ends:
                phase.coast_left = self._coast_steps()
                return 0.0, cte, PHASE_CLOSE
            return cmd, cte, PHASE_CLOSE

        gains = guidance.GuidanceGains(self.k1, self.k2, cfg.lookahead)
        geom = guidance.corrector_geometry(
            self.state, self.path, phase.s_min, cfg.lookahead, proj_hint=phase.s_proj
        )
        phase.s_proj = geom.proj.s
        phase.s_min = max(phase.s_min, geom.p2.s)
        ends = geom.end_of_path or geom.p2.s >= self.path.total_length - cfg.end_s_tol
        if ends:
            phase.coast_left = self._coast_steps()
            return 0.0, geom.proj_dist, PHASE_CLOSE
        return guidance.blended_command(self.state, geom, gains), geom.proj_dist, PHASE_CLOSE

    def _coast_steps(self) -> int:
        # Coast straight for one look-ahead time so trailing error is recorded.
        return max(1, int(round(self.config.lookahead / self.state.speed / self.config.dt)))

    def _post_step(self) -> None:
        phase = self.phase
        if isinstance(phase, CloseRange) and phase.coast_left is not None:
            phase.coast_left -= 1
            if phase.coast_left <= 0:
                self.phase = Done()


def run_mission(path: ReferencePath, state: VehicleState, config: MissionConfig) -> RunRecord:
    """Convenience wrapper: build and run a mission to completion."""
    return Mission(path, state, config).run()
