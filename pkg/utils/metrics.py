"""
Prometheus metrics for simulation runs
"""

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, generate_latest


class RunMetrics:
    """Collectors for a single run, each run on a registry of its own."""

    def __init__(self, scenario: str):
        self.scenario = scenario
        self.registry = CollectorRegistry()
        self.step_count = Counter('vpsim_steps_total', 'Total leap-frog steps advanced', ['scenario'],
                                  registry=self.registry)
        self.step_latency = Histogram('vpsim_step_duration_seconds', 'Wall-clock time per leap-frog step',
                                      registry=self.registry)
        self.particles = Gauge('vpsim_particles', 'Particles in the run', registry=self.registry)
        self.grid_half_length = Gauge('vpsim_grid_half_length', 'Current grid half-length L^n', registry=self.registry)
        self.cfl_violations = Counter('vpsim_cfl_violations_total', 'Steps with S*dt > dx', registry=self.registry)

    def record_step(self, seconds: float) -> None:
        self.step_count.labels(scenario=self.scenario).inc()
        self.step_latency.observe(seconds)

    def sample(self, name: str, **labels) -> float:
        value = self.registry.get_sample_value(name, labels or None)
        return 0.0 if value is None else value

    def exposition(self) -> bytes:
        return generate_latest(self.registry)
