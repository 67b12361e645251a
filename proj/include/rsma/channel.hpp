#pragma once

#include <vector>

#include <json.hpp>

#include "rsma/config.hpp"
#include "rsma/numerics.hpp"
#include "rsma/rng.hpp"

namespace rsma {

// One multipath component. Angles are normalized (half-wavelength spacing),
// so they lie in [-1/2, 1/2]. Vector channels use only `angle_rx`.
struct Path {
  cdouble gain;
  double delay_s = 0.0;
  double angle_rx = 0.0;
  double angle_tx = 0.0;
};
using PathSet = std::vector<Path>;

// Entries e^{-j 2 pi m theta}, m = 0..dim-1.
CVec steering_vector(int dim, double theta);

// sum_p gain_p a_rows(angle_rx) a_cols(angle_tx)^H e^{-j pi tau_p B}
CMat synthesize_matrix(const PathSet& paths, int rows, int cols, double bandwidth_hz);
// sum_p gain_p a_dim(angle_rx) e^{-j pi tau_p B}
CVec synthesize_vector(const PathSet& paths, int dim, double bandwidth_hz);

PathSet sample_paths(const SystemConfig& cfg, Rng& rng);

// One channel realization. Composite k is [H_rb diag(h_sr,k), h_d,k], i.e.
// M x (N+1) with the direct link as the last column.
class ChannelSet {
 public:
  ChannelSet(CMat irs_to_bs, std::vector<CVec> device_to_irs, std::vector<CVec> device_to_bs);

  int antennas() const { return static_cast<int>(irs_to_bs_.rows()); }
  int irs_elements() const { return static_cast<int>(irs_to_bs_.cols()); }
  int devices() const { return static_cast<int>(composite_.size()); }

  const CMat& irs_to_bs() const { return irs_to_bs_; }
  const CVec& device_to_irs(int k) const { return device_to_irs_.at(k); }
  const CVec& device_to_bs(int k) const { return device_to_bs_.at(k); }
  const CMat& composite(int k) const { return composite_.at(k); }
  const std::vector<CMat>& composites() const { return composite_; }

  // Same realization with every device-to-IRS link zeroed.
  ChannelSet without_irs() const;

 private:
  CMat irs_to_bs_;
  std::vector<CVec> device_to_irs_;
  std::vector<CVec> device_to_bs_;
  std::vector<CMat> composite_;
};

ChannelSet sample_channels(const SystemConfig& cfg, Rng& rng);

// H_k v. The last entry of v must be 1 and the others unit modulus.
CVec effective_vector(const CMat& composite, const CVec& phases);
void check_phases(const CVec& phases, Eigen::Index irs_elements);

// Row-major stacking: entry m*(N+1)+c holds H(m, c).
CVec stack_rows(const CMat& h);
CMat unstack_rows(const CVec& stacked, Eigen::Index rows, Eigen::Index cols);

struct LiftedForms {
  CVec stacked;        // h~, length M(N+1)
  CMat phase_blocks;   // V~, M x M(N+1): V~ h~ = H v
  CMat beam_blocks;    // G~, (N+1) x M(N+1): [g_1 I, ..., g_M I]
};
LiftedForms lift_stack(const CMat& composite, const CVec& beam, const CVec& phases);

// Sample covariance of the stacked composite channel over fresh draws.
CMat estimate_sigma(const SystemConfig& cfg, int device, Rng& rng, int n_samples);

// Sigma - Sigma (Sigma + s I)^{-1} Sigma, s = noise / (training_length p_max),
// computed in the eigenbasis of Sigma.
CMat error_covariance(const CMat& sigma, double noise_power, int training_length, double p_max);

struct CsitModel {
  CsitMode mode = CsitMode::kPerfect;
  std::vector<CMat> estimated;     // H^_k
  std::vector<CMat> error_cov;     // Phi_k
  std::vector<CMat> channel_cov;   // Sigma_k
  int training_length = 0;

  static CsitModel perfect(const ChannelSet& channels);
};

// Draws e_k ~ CN(0, Phi_k) and sets H^_k = H_k - unstack(e_k).
CsitModel build_csit(const SystemConfig& cfg, const ChannelSet& channels,
                     const std::vector<CMat>& sigma, Rng& rng);

// What the optimizer sees: composites (true or estimated) and, in robust
// mode, the error covariances. Non-owning.
class CsiView {
 public:
  static CsiView perfect(const ChannelSet& channels);
  static CsiView estimated(const CsitModel& csit);
  // Perfect-mode models fall back to the true channels.
  static CsiView select(const ChannelSet& channels, const CsitModel& csit);

  int devices() const { return static_cast<int>(composites_->size()); }
  int antennas() const { return static_cast<int>(composites_->front().rows()); }
  int irs_elements() const { return static_cast<int>(composites_->front().cols()) - 1; }
  const CMat& composite(int k) const { return (*composites_)[k]; }
  bool robust() const { return error_cov_ != nullptr; }
  const CMat& error_cov(int k) const { return (*error_cov_)[k]; }

 private:
  CsiView(const std::vector<CMat>* composites, const std::vector<CMat>* error_cov)
      : composites_(composites), error_cov_(error_cov) {}
  const std::vector<CMat>* composites_;
  const std::vector<CMat>* error_cov_;
};

nlohmann::json channels_to_json(const ChannelSet& channels);
ChannelSet channels_from_json(const nlohmann::json& j);

}  // namespace rsma
