#include "secfuse/cross_covariance.hpp"

#include <string>

namespace secfuse {
namespace {

Matrix init_block(const std::optional<Matrix>& value, Index rows, Index cols, const char* name) {
  if (!value) return Matrix::Zero(rows, cols);
  if (value->rows() != rows || value->cols() != cols) {
    throw ConfigError(std::string("cross init ") + name + ": expected " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", got " + std::to_string(value->rows()) + "x" +
                      std::to_string(value->cols()));
  }
  return *value;
}

struct PairTerms {
  Matrix gc;       // Gamma C_a
  Matrix gcp;      // Gamma C_a Phi_a
  Matrix gamma_a;  // I - Gamma C_a Phi_a
  Matrix gamma_b;  // Gamma C_a A_a
  Matrix k_a;      // I - K C_a
};

PairTerms terms(const GainPair& g, const AugmentedSubsystem& aug) {
  PairTerms t;
  t.gc = g.Gamma * aug.C_a;
  t.gcp = t.gc * aug.Phi_a;
  t.gamma_a = attack_gain_complement(g.Gamma, aug.C_a, aug.Phi_a);
  t.gamma_b = attack_gain_state(g.Gamma, aug.C_a, aug.A_a);
  t.k_a = state_gain_complement(g.K, aug.C_a);
  return t;
}

// One direction; `ij` and `ji` hold step-(k-1) matrices.
CrossState advance(const CrossState& ij, const CrossState& ji, const PairTerms& ti, const PairTerms& tj,
                   const AugmentedSubsystem& ai, const AugmentedSubsystem& aj) {
  const Matrix& Ai = ai.A_a;
  const Matrix& Aj = aj.A_a;
  const Matrix& Phi_i = ai.Phi_a;
  const Matrix& Phi_j = aj.Phi_a;

  const Matrix xi1 = ij.P_phi + ij.Y + ji.Y.transpose();
  const Matrix xi = Ai * ij.P_X * Aj.transpose() - Ai * ij.U * Phi_j.transpose() -
                    Phi_i * ji.U.transpose() * Aj.transpose() - Phi_i * xi1 * Phi_j.transpose() + ij.Q_a;
  const Matrix gxg = ti.gc * xi * tj.gc.transpose();
  const Matrix uji_gb = ji.U.transpose() * tj.gamma_b.transpose();
  const Matrix gb_uij = ti.gamma_b * ij.U;

  CrossState next = ij;
  next.P_phi = ti.gcp * xi1 - xi1 * tj.gamma_a.transpose() + uji_gb + gb_uij + gxg;
  next.P_X = ti.k_a * xi * tj.k_a.transpose();
  next.U = ti.k_a * (Ai * ij.U - Phi_i * ij.V) + ti.k_a * xi * tj.gc.transpose();
  next.Y = -uji_gb - gb_uij - xi1 * tj.gcp.transpose() - ti.gamma_a * ij.V - gxg;
  next.V = gxg + ij.V * tj.gamma_a.transpose() - ti.gcp * ij.V + uji_gb + gb_uij;
  return next;
}

}  // namespace

CrossState init_cross(SensorId i, SensorId j, const SystemModel& sys, Index p_i, Index p_j, const CrossInit& init) {
  if (i == j) throw ConfigError("cross state requires distinct sensors, got " + std::to_string(i.value) + " twice");
  if (p_i < 1 || p_j < 1) throw ConfigError("cross state requires attack channels of size >= 1");
  const Index n = sys.dim();
  CrossState cs;
  cs.i = i;
  cs.j = j;
  cs.P_X = init_block(init.P_X, n + p_i, n + p_j, "P_X");
  cs.P_phi = init_block(init.P_phi, p_i, p_j, "P_phi");
  cs.U = init_block(init.U, n + p_i, p_j, "U");
  cs.Y = init_block(init.Y, p_i, p_j, "Y");
  cs.V = init_block(init.V, p_i, p_j, "V");
  cs.Q_a = cross_process_noise(sys, p_i, p_j);
  return cs;
}

std::pair<CrossState, CrossState> propagate_cross(const CrossState& ij, const CrossState& ji, const GainPair& gains_i,
                                                  const GainPair& gains_j, const AugmentedSubsystem& aug_i,
                                                  const AugmentedSubsystem& aug_j) {
  if (ij.i != ji.j || ij.j != ji.i) throw InputError("propagate_cross: states are not a (i,j)/(j,i) pair");
  const PairTerms ti = terms(gains_i, aug_i);
  const PairTerms tj = terms(gains_j, aug_j);
  return {advance(ij, ji, ti, tj, aug_i, aug_j), advance(ji, ij, tj, ti, aug_j, aug_i)};
}

}  // namespace secfuse
