#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "corona/models/catalog.hpp"
#include "corona/propagation/geometry.hpp"

namespace corona::propagation {

using cd = std::complex<double>;

inline constexpr double kEpsilon0 = 8.8541878128e-12;      // F/m
inline constexpr double kMu0 = 1.25663706212e-6;           // H/m
inline constexpr double kZ0 = 120.0 * 3.14159265358979323846;  // ohm
inline constexpr double kAluminiumConductivity = 3.5e7;    // S/m
inline constexpr double kResidualTolerance = 1e-8;

/// One equivalent conductor: centre (x, h) in m, radius r in m, number of
/// parallel subconductors of radius r_sub sharing the internal impedance.
struct Conductor {
  double x = 0.0;
  double h = 0.0;
  double r = 0.0;
  std::size_t strands = 1;
  double r_sub = 0.0;
};

struct LineOptions {
  double f_ri = kDefaultFrequency;
  double rho = kDefaultEarthResistivity;
  double conductivity = kAluminiumConductivity;
};

struct LineElectricalModel {
  Eigen::MatrixXcd Z;  // ohm/m
  Eigen::MatrixXcd Y;  // S/m
  Eigen::MatrixXd C;   // F/m
  double f_ri = 0.0;
  double rho = 0.0;
  cd P;  // complex penetration depth, m
  std::vector<Conductor> conductors;
};

/// sqrt(rho / (j omega mu0)), principal branch.
cd penetration_depth(double f, double rho);

/// Potential coefficients with images in a perfect ground; C = P^-1,
/// Y = j omega C. Z adds the external inductance with images displaced by
/// the complex depth and a skin-effect internal impedance. Throws
/// Error(Geometry) for overlapping or grounded conductors and
/// Error(InvalidInput) for non-positive f or rho.
LineElectricalModel build_line_model(std::span<const Conductor> conductors, const LineOptions& options);
/// Uses the geometry's f_ri and rho.
LineElectricalModel build_line_model(const LineGeometry& geometry,
                                     double conductivity = kAluminiumConductivity);

std::vector<Conductor> conductors_of(const LineGeometry& geometry);

struct ModalDecomposition {
  Eigen::MatrixXcd M;  // right eigenvectors of ZY
  Eigen::MatrixXcd N;  // right eigenvectors of YZ, columns matched to M
  Eigen::VectorXcd lambda;
  Eigen::VectorXcd gamma;  // sqrt(lambda), Re >= 0
  Eigen::VectorXd alpha;   // Re(gamma)
  double residual = 0.0;   // worst relative diagonalisation residual
};

/// Throws Error(DefectiveMatrix) when an eigenvector matrix is singular,
/// the two spectra disagree, or a residual exceeds 1e-8 relative.
ModalDecomposition modal_decompose(const Eigen::MatrixXcd& Z, const Eigen::MatrixXcd& Y);
ModalDecomposition modal_decompose(const LineElectricalModel& model);

/// 10^(dB/20) uA/sqrt(m), returned in A/sqrt(m).
double excitation_linear(double db);

/// I = N g N^-1 C Gamma / (2 pi eps0) with g_m = 1/sqrt(4 alpha_m).
/// Throws Error(ZeroAttenuation) when some alpha_m <= 0 and
/// Error(InvalidInput) on a length mismatch.
Eigen::VectorXcd corona_currents(const LineElectricalModel& model, const ModalDecomposition& modes,
                                 const Eigen::VectorXd& gamma_linear);

struct GroundField {
  cd Hx;  // A/m
  cd Ey;  // V/m
};

GroundField ground_field(std::span<const Conductor> conductors, const Eigen::VectorXcd& currents, cd P,
                         double x);

/// 20 log10(|E_y| / 1 uV/m). Throws Error(ZeroField) for a zero or
/// non-finite field.
double ri_level(cd Ey);

enum class PhaseCombination { ThreeDb, PowerSum };

struct PhaseResult {
  double rief = 0.0;  // dB
  Eigen::VectorXcd currents;
  GroundField field;
  double level = 0.0;  // dB(uV/m)
};

struct RIPrediction {
  std::vector<PhaseResult> phases;  // one per excited phase
  double level = 0.0;               // combined, dB(uV/m)
  double observation_x = 0.0;
};

double combine_phase_levels(std::span<const double> levels, PhaseCombination rule);

struct RIOptions {
  double conductivity = kAluminiumConductivity;
  PhaseCombination combination = PhaseCombination::ThreeDb;
};

/// Each phase is excited alone with its model (or overridden) RIEF; the
/// phase levels at the measurement point's lateral offset are combined by
/// the chosen rule.
RIPrediction ri_line_prediction(const LineGeometry& geometry, models::ModelId model,
                                const RIOptions& options = {});

}  // namespace corona::propagation
