"""Covariant Hamiltonian mechanics on curved manifolds with gauge backgrounds.

Covariant Poisson brackets in three regimes (geodesic, abelian, non-abelian),
integration of the generated flows, and residual verification of Killing
tensors and gauge-covariant constants of motion, with a catalog of worked
systems (Kerr, an axial quantum dot, an SU(2) point charge in the plane).
"""
from .diff import Dual, DifferentiationScheme, jacobian
from .errors import (ConfigError, CovmechError, DetunedParameters,
                     ExtremalParams, MaxStepsExceeded, NonFiniteState,
                     OutOfDomain, RankZeroOperand, SingularMetric,
                     UnknownObservable)
from .geometry import (MetricChart, axial_chart, christoffel_at,
                       covariant_tensor_derivative, euclidean_chart,
                       inverse_metric_at, metric_at, metric_partials_at)
from .gauge import (AbelianBackground, NonAbelianBackground, ScalarPotential,
                    StructureConstants, apply_gauge_transformation,
                    field_strength_abelian, field_strength_nonabelian,
                    su2_structure_constants)
from .phase import (BracketContext, Observable, PhasePoint,
                    bracket_observable, charge_observable,
                    coordinate_observable, covariant_bracket,
                    covariant_observable_derivative, jacobi_residual,
                    momentum_observable, noether_flow, product_observable)
from .killing import (GeneratorSeries, SymmetricTensorField, closure_check,
                      conserved_check, constant_field, field_from_monomials,
                      generator_bracket, hierarchy_residual, killing_residual,
                      monomial_observable, series_observable, symmetrize)
from .dynamics import (HamiltonianSpec, IntegratorConfig, Trajectory,
                       equations_of_motion, hamiltonian_eval, integrate,
                       momentum_from_velocity, trajectory_to_csv,
                       trajectory_to_json, velocity_from_momentum)
from .catalog import (CatalogSystem, KerrParams, QuantumDotParams,
                      SU2PlaneParams, build_free_particle, build_kerr,
                      build_quantum_dot, build_su2_plane, build_system,
                      carter_tensor, kerr_bound_orbit, kerr_chart,
                      quantum_dot_quartic_series)

__version__ = "0.1.0"
