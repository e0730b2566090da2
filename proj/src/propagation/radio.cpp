#include "corona/propagation/radio.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "corona/error.hpp"

namespace corona::propagation {

namespace {

constexpr double kPi = std::numbers::pi;
const cd kJ{0.0, 1.0};

}  // namespace

cd penetration_depth(double f, double rho) {
  const double omega = 2.0 * kPi * f;
  return std::sqrt(cd(rho, 0.0) / (kJ * omega * kMu0));
}

std::vector<Conductor> conductors_of(const LineGeometry& geometry) {
  std::vector<Conductor> out;
  for (const auto& p : geometry.phases) {
    Conductor c;
    c.x = p.x;
    c.h = p.h;
    c.r = equivalent_radius(p);
    c.strands = static_cast<std::size_t>(std::max(1.0, std::round(p.bundle.n)));
    c.r_sub = p.bundle.d / 200.0;
    out.push_back(c);
  }
  return out;
}

LineElectricalModel build_line_model(std::span<const Conductor> conductors, const LineOptions& options) {
  if (!(options.f_ri > 0.0)) throw Error(ErrorKind::InvalidInput, "frequency must be positive");
  if (!(options.rho > 0.0)) throw Error(ErrorKind::InvalidInput, "earth resistivity must be positive");
  if (!(options.conductivity > 0.0)) throw Error(ErrorKind::InvalidInput, "conductivity must be positive");
  if (conductors.empty()) throw Error(ErrorKind::Geometry, "no conductors");
  const auto n = static_cast<Eigen::Index>(conductors.size());
  for (std::size_t i = 0; i < conductors.size(); ++i) {
    const auto& a = conductors[i];
    if (!(a.r > 0.0)) throw Error(ErrorKind::Geometry, "conductor radius must be positive");
    if (!(a.h > a.r)) throw Error(ErrorKind::Geometry, "conductor touches or is below ground");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& b = conductors[j];
      if (std::hypot(a.x - b.x, a.h - b.h) <= a.r + b.r) throw Error(ErrorKind::Geometry, "overlapping conductors");
    }
  }

  const double omega = 2.0 * kPi * options.f_ri;
  const cd P = penetration_depth(options.f_ri, options.rho);

  Eigen::MatrixXd potential(n, n);
  Eigen::MatrixXcd external(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = conductors[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& b = conductors[static_cast<std::size_t>(j)];
      const double dx = a.x - b.x;
      if (i == j) {
        potential(i, j) = std::log(2.0 * a.h / a.r);
        external(i, j) = std::log(2.0 * (a.h + P) / a.r);
      } else {
        const double direct = std::hypot(dx, a.h - b.h);
        potential(i, j) = std::log(std::hypot(dx, a.h + b.h) / direct);
        const cd image = std::sqrt(dx * dx + (a.h + b.h + 2.0 * P) * (a.h + b.h + 2.0 * P));
        external(i, j) = std::log(image / direct);
      }
    }
  }
  potential /= 2.0 * kPi * kEpsilon0;

  LineElectricalModel m;
  m.C = potential.inverse();
  m.C = 0.5 * (m.C + m.C.transpose()).eval();
  m.Y = kJ * omega * m.C.cast<cd>();
  m.Z = kJ * omega * kMu0 / (2.0 * kPi) * external;
  // Internal impedance in the strong skin-effect limit (radius >> skin
  // depth), shared by the parallel subconductors of a bundle.
  const double skin_depth = std::sqrt(2.0 / (omega * kMu0 * options.conductivity));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = conductors[static_cast<std::size_t>(i)];
    const double r_sub = c.r_sub > 0.0 ? c.r_sub : c.r;
    const cd z_sub = cd(1.0, 1.0) / (2.0 * kPi * r_sub * options.conductivity * skin_depth);
    m.Z(i, i) += z_sub / static_cast<double>(std::max<std::size_t>(1, c.strands));
  }
  m.f_ri = options.f_ri;
  m.rho = options.rho;
  m.P = P;
  m.conductors.assign(conductors.begin(), conductors.end());
  return m;
}

LineElectricalModel build_line_model(const LineGeometry& geometry, double conductivity) {
  geometry.check();
  const auto cs = conductors_of(geometry);
  return build_line_model(cs, {geometry.f_ri, geometry.rho, conductivity});
}

namespace {

double diagonal_residual(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& V, const Eigen::VectorXcd& lambda) {
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(V);
  if (!lu.isInvertible()) throw Error(ErrorKind::DefectiveMatrix, "eigenvector matrix is singular");
  const Eigen::MatrixXcd D = lu.solve(A * V);
  const Eigen::MatrixXcd off = D - Eigen::MatrixXcd(lambda.asDiagonal());
  const double scale = A.norm();
  return scale > 0.0 ? off.norm() / scale : off.norm();
}

}  // namespace

ModalDecomposition modal_decompose(const Eigen::MatrixXcd& Z, const Eigen::MatrixXcd& Y) {
  if (Z.rows() != Z.cols() || Y.rows() != Y.cols() || Z.rows() != Y.rows() || Z.rows() == 0) {
    throw Error(ErrorKind::InvalidInput, "Z and Y must be square with equal size");
  }
  const Eigen::MatrixXcd ZY = Z * Y;
  const Eigen::MatrixXcd YZ = Y * Z;
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> a(ZY);
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> b(YZ);
  if (a.info() != Eigen::Success || b.info() != Eigen::Success) {
    throw Error(ErrorKind::DefectiveMatrix, "eigen decomposition did not converge");
  }

  const auto n = ZY.rows();
  ModalDecomposition out;
  out.lambda = a.eigenvalues();
  out.M = a.eigenvectors();
  out.N.resize(n, n);

  // Pair each ZY eigenvalue with the nearest unused YZ eigenvalue.
  const double scale = std::max(ZY.norm(), std::numeric_limits<double>::min());
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  double spectrum_gap = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index best = -1;
    double best_d = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (used[static_cast<std::size_t>(m)]) continue;
      const double d = std::abs(out.lambda(k) - b.eigenvalues()(m));
      if (best < 0 || d < best_d) {
        best = m;
        best_d = d;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.N.col(k) = b.eigenvectors().col(best);
    spectrum_gap = std::max(spectrum_gap, best_d / scale);
  }
  if (spectrum_gap > kResidualTolerance) {
    throw Error(ErrorKind::DefectiveMatrix, "spectra of ZY and YZ disagree");
  }

  out.residual = std::max(diagonal_residual(ZY, out.M, out.lambda), diagonal_residual(YZ, out.N, out.lambda));
  if (!(out.residual <= kResidualTolerance)) {
    throw Error(ErrorKind::DefectiveMatrix, "modal diagonalisation residual too large");
  }
  out.gamma = out.lambda.unaryExpr([](const cd& l) { return std::sqrt(l); });
  out.alpha = out.gamma.real();
  return out;
}

ModalDecomposition modal_decompose(const LineElectricalModel& model) { return modal_decompose(model.Z, model.Y); }

double excitation_linear(double db) { return std::pow(10.0, db / 20.0) * 1e-6; }

Eigen::VectorXcd corona_currents(const LineElectricalModel& model, const ModalDecomposition& modes,
                                 const Eigen::VectorXd& gamma_linear) {
  const auto n = model.C.rows();
  if (gamma_linear.size() != n || modes.N.rows() != n) {
    throw Error(ErrorKind::InvalidInput, "excitation length must equal the conductor count");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(modes.alpha(k) > 0.0)) throw Error(ErrorKind::ZeroAttenuation, "a mode has no attenuation");
  }
  const Eigen::VectorXcd J = (model.C * gamma_linear / (2.0 * kPi * kEpsilon0)).cast<cd>();
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(modes.N);
  if (!lu.isInvertible()) throw Error(ErrorKind::DefectiveMatrix, "modal matrix is singular");
  Eigen::VectorXcd Jm = lu.solve(J);
  for (Eigen::Index k = 0; k < n; ++k) Jm(k) /= std::sqrt(4.0 * modes.alpha(k));
  return modes.N * Jm;
}

GroundField ground_field(std::span<const Conductor> conductors, const Eigen::VectorXcd& currents, cd P,
                         double x) {
  if (currents.size() != static_cast<Eigen::Index>(conductors.size())) {
    throw Error(ErrorKind::InvalidInput, "current vector length must equal the conductor count");
  }
  cd hx{0.0, 0.0};
  for (std::size_t i = 0; i < conductors.size(); ++i) {
    const auto& c = conductors[i];
    const double dx = x - c.x;
    const cd up = c.h + P;
    const cd down = c.h - P;
    hx += currents(static_cast<Eigen::Index>(i)) / (2.0 * kPi) *
          (up / (dx * dx + up * up) - down / (dx * dx + down * down));
  }
  return {hx, kZ0 * hx};
}

double ri_level(cd Ey) {
  const double mag = std::abs(Ey);
  if (!(mag > 0.0) || !std::isfinite(mag)) throw Error(ErrorKind::ZeroField, "field magnitude is zero");
  return 20.0 * std::log10(mag / 1e-6);
}

double combine_phase_levels(std::span<const double> levels, PhaseCombination rule) {
  if (levels.empty()) throw Error(ErrorKind::InvalidInput, "no phase levels to combine");
  std::vector<double> v(levels.begin(), levels.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  if (rule == PhaseCombination::PowerSum) {
    double s = 0.0;
    for (double l : v) s += std::pow(10.0, (l - v[0]) / 10.0);
    return v[0] + 10.0 * std::log10(s);
  }
  if (v.size() == 1 || v[0] - v[1] >= 3.0) return v[0];
  return 0.5 * (v[0] + v[1]) + 1.5;
}

RIPrediction ri_line_prediction(const LineGeometry& geometry, models::ModelId model, const RIOptions& options) {
  const auto line = build_line_model(geometry, options.conductivity);
  const auto modes = modal_decompose(line);
  RIPrediction out;
  out.observation_x = geometry.mic.x;
  std::vector<double> levels;
  const auto n = static_cast<Eigen::Index>(geometry.phases.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = geometry.phases[static_cast<std::size_t>(i)];
    PhaseResult r;
    r.rief = p.rief ? *p.rief : models::ri_excitation(model, p.bundle);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    g(i) = excitation_linear(r.rief);
    r.currents = corona_currents(line, modes, g);
    r.field = ground_field(line.conductors, r.currents, line.P, geometry.mic.x);
    r.level = ri_level(r.field.Ey);
    levels.push_back(r.level);
    out.phases.push_back(std::move(r));
  }
  out.level = combine_phase_levels(levels, options.combination);
  return out;
}

}  // namespace corona::propagation
