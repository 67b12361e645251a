#include "rsma/channel.hpp"

#include <cmath>
#include <numbers>

#include "rsma/errors.hpp"

namespace rsma {

namespace {

constexpr double kPi = std::numbers::pi;

double draw_angle(Rng& rng) { return 0.5 * std::sin(rng.uniform(-kPi / 2.0, kPi / 2.0)); }

cdouble delay_phase(double delay_s, double bandwidth_hz) {
  return std::polar(1.0, -2.0 * kPi * delay_s * bandwidth_hz / 2.0);
}

}  // namespace

CVec steering_vector(int dim, double theta) {
  CVec a(dim);
  for (int m = 0; m < dim; ++m) a(m) = std::polar(1.0, -2.0 * kPi * m * theta);
  return a;
}

CMat synthesize_matrix(const PathSet& paths, int rows, int cols, double bandwidth_hz) {
  CMat h = CMat::Zero(rows, cols);
  for (const Path& p : paths) {
    const cdouble scale = p.gain * delay_phase(p.delay_s, bandwidth_hz);
    h.noalias() += scale * steering_vector(rows, p.angle_rx) * steering_vector(cols, p.angle_tx).adjoint();
  }
  return h;
}

CVec synthesize_vector(const PathSet& paths, int dim, double bandwidth_hz) {
  CVec h = CVec::Zero(dim);
  for (const Path& p : paths) {
    h += p.gain * delay_phase(p.delay_s, bandwidth_hz) * steering_vector(dim, p.angle_rx);
  }
  return h;
}

PathSet sample_paths(const SystemConfig& cfg, Rng& rng) {
  const int count = rng.uniform_int(cfg.path_count_min, cfg.path_count_max);
  PathSet paths(static_cast<std::size_t>(count));
  for (Path& p : paths) {
    p.gain = rng.complex_normal();
    p.delay_s = rng.uniform() / cfg.bandwidth_hz;
    p.angle_rx = draw_angle(rng);
    p.angle_tx = draw_angle(rng);
  }
  return paths;
}

ChannelSet::ChannelSet(CMat irs_to_bs, std::vector<CVec> device_to_irs, std::vector<CVec> device_to_bs)
    : irs_to_bs_(std::move(irs_to_bs)),
      device_to_irs_(std::move(device_to_irs)),
      device_to_bs_(std::move(device_to_bs)) {
  const Eigen::Index m = irs_to_bs_.rows();
  const Eigen::Index n = irs_to_bs_.cols();
  if (m < 1 || n < 1) throw ValidationError("ChannelSet: empty IRS-to-BS matrix");
  if (device_to_irs_.empty() || device_to_irs_.size() != device_to_bs_.size()) {
    throw ValidationError("ChannelSet: need one IRS link and one direct link per device");
  }
  composite_.reserve(device_to_irs_.size());
  for (std::size_t k = 0; k < device_to_irs_.size(); ++k) {
    if (device_to_irs_[k].size() != n || device_to_bs_[k].size() != m) {
      throw ValidationError("ChannelSet: link dimensions disagree with the IRS-to-BS matrix");
    }
    CMat h(m, n + 1);
    h.leftCols(n) = irs_to_bs_ * device_to_irs_[k].asDiagonal();
    h.col(n) = device_to_bs_[k];
    composite_.push_back(std::move(h));
  }
}

ChannelSet ChannelSet::without_irs() const {
  std::vector<CVec> zeros;
  for (const CVec& h : device_to_irs_) zeros.push_back(CVec::Zero(h.size()));
  return ChannelSet(irs_to_bs_, std::move(zeros), device_to_bs_);
}

ChannelSet sample_channels(const SystemConfig& cfg, Rng& rng) {
  validate(cfg);
  const int m = cfg.antennas;
  const int n = cfg.irs_elements;
  CMat irs_to_bs = synthesize_matrix(sample_paths(cfg, rng), m, n, cfg.bandwidth_hz);
  std::vector<CVec> to_irs;
  std::vector<CVec> to_bs;
  for (int k = 0; k < cfg.devices; ++k) {
    to_irs.push_back(synthesize_vector(sample_paths(cfg, rng), n, cfg.bandwidth_hz));
    to_bs.push_back(synthesize_vector(sample_paths(cfg, rng), m, cfg.bandwidth_hz));
  }
  return ChannelSet(std::move(irs_to_bs), std::move(to_irs), std::move(to_bs));
}

void check_phases(const CVec& phases, Eigen::Index irs_elements) {
  if (phases.size() != irs_elements + 1) {
    throw ValidationError("phase vector must have N+1 entries");
  }
  for (Eigen::Index n = 0; n < irs_elements; ++n) {
    if (std::abs(std::abs(phases(n)) - 1.0) > tol::kUnitModulus) {
      throw ValidationError("phase entry " + std::to_string(n) + " is not unit modulus");
    }
  }
  if (std::abs(phases(irs_elements) - cdouble(1.0)) > tol::kUnitModulus) {
    throw ValidationError("last phase entry must equal 1");
  }
}

CVec effective_vector(const CMat& composite, const CVec& phases) {
  check_phases(phases, composite.cols() - 1);
  return composite * phases;
}

CVec stack_rows(const CMat& h) {
  const Eigen::Index cols = h.cols();
  CVec out(h.size());
  for (Eigen::Index m = 0; m < h.rows(); ++m) {
    for (Eigen::Index c = 0; c < cols; ++c) out(m * cols + c) = h(m, c);
  }
  return out;
}

CMat unstack_rows(const CVec& stacked, Eigen::Index rows, Eigen::Index cols) {
  if (stacked.size() != rows * cols) throw ValidationError("unstack_rows: size mismatch");
  CMat h(rows, cols);
  for (Eigen::Index m = 0; m < rows; ++m) {
    for (Eigen::Index c = 0; c < cols; ++c) h(m, c) = stacked(m * cols + c);
  }
  return h;
}

LiftedForms lift_stack(const CMat& composite, const CVec& beam, const CVec& phases) {
  const Eigen::Index m = composite.rows();
  const Eigen::Index c = composite.cols();
  if (beam.size() != m) throw ValidationError("lift_stack: beamformer length must equal M");
  if (phases.size() != c) throw ValidationError("lift_stack: phase vector length must equal N+1");
  LiftedForms out{stack_rows(composite), CMat::Zero(m, m * c), CMat::Zero(c, m * c)};
  for (Eigen::Index r = 0; r < m; ++r) {
    out.phase_blocks.block(r, r * c, 1, c) = phases.transpose();
    out.beam_blocks.block(0, r * c, c, c) = beam(r) * CMat::Identity(c, c);
  }
  return out;
}

CMat estimate_sigma(const SystemConfig& cfg, int device, Rng& rng, int n_samples) {
  if (n_samples < 100) throw ValidationError("estimate_sigma: need at least 100 samples");
  if (device < 0 || device >= cfg.devices) throw ValidationError("estimate_sigma: bad device index");
  const int m = cfg.antennas;
  const int n = cfg.irs_elements;
  const Eigen::Index dim = static_cast<Eigen::Index>(m) * (n + 1);
  CMat acc = CMat::Zero(dim, dim);
  for (int s = 0; s < n_samples; ++s) {
    const CMat irs_to_bs = synthesize_matrix(sample_paths(cfg, rng), m, n, cfg.bandwidth_hz);
    const CVec to_irs = synthesize_vector(sample_paths(cfg, rng), n, cfg.bandwidth_hz);
    const CVec to_bs = synthesize_vector(sample_paths(cfg, rng), m, cfg.bandwidth_hz);
    CMat h(m, n + 1);
    h.leftCols(n) = irs_to_bs * to_irs.asDiagonal();
    h.col(n) = to_bs;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(stack_rows(h));
  }
  CMat sigma = acc.selfadjointView<Eigen::Lower>();
  return sigma / static_cast<double>(n_samples);
}

namespace {

Eigen::VectorXd error_spectrum(const Eigen::VectorXd& sigma_values, double shrink) {
  Eigen::VectorXd mu(sigma_values.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double lam = std::max(sigma_values(i), 0.0);
    mu(i) = lam * shrink / (lam + shrink);
  }
  return mu;
}

double shrink_level(double noise_power, int training_length, double p_max) {
  if (!(noise_power > 0.0) || training_length < 1 || !(p_max > 0.0)) {
    throw NumericalError("error covariance needs positive noise, training length and power");
  }
  return noise_power / (static_cast<double>(training_length) * p_max);
}

}  // namespace

CMat error_covariance(const CMat& sigma, double noise_power, int training_length, double p_max) {
  const HermitianEig eig = hermitian_eig(sigma);
  const Eigen::VectorXd mu = error_spectrum(eig.values, shrink_level(noise_power, training_length, p_max));
  CMat phi = eig.vectors * mu.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (phi + phi.adjoint());
}

CsitModel CsitModel::perfect(const ChannelSet& channels) {
  CsitModel out;
  out.mode = CsitMode::kPerfect;
  out.estimated = channels.composites();
  const Eigen::Index dim = channels.composite(0).size();
  out.error_cov.assign(channels.composites().size(), CMat::Zero(dim, dim));
  return out;
}

CsitModel build_csit(const SystemConfig& cfg, const ChannelSet& channels,
                     const std::vector<CMat>& sigma, Rng& rng) {
  if (static_cast<int>(sigma.size()) != channels.devices()) {
    throw ValidationError("build_csit: need one covariance per device");
  }
  const double shrink = shrink_level(cfg.noise_power(), cfg.training_length, cfg.p_max_w);
  CsitModel out;
  out.mode = CsitMode::kEstimated;
  out.training_length = cfg.training_length;
  out.channel_cov = sigma;
  for (int k = 0; k < channels.devices(); ++k) {
    const CMat& h = channels.composite(k);
    if (sigma[k].rows() != h.size() || sigma[k].cols() != h.size()) {
      throw ValidationError("build_csit: covariance dimension must be M(N+1)");
    }
    const HermitianEig eig = hermitian_eig(sigma[k]);
    const Eigen::VectorXd mu = error_spectrum(eig.values, shrink);
    CMat phi = eig.vectors * mu.asDiagonal() * eig.vectors.adjoint();
    CVec z(h.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.complex_normal();
    const CVec err = eig.vectors * (mu.cwiseSqrt().cast<cdouble>().cwiseProduct(z));
    if (!err.allFinite()) throw NumericalError("build_csit: non-finite error draw");
    out.estimated.push_back(unstack_rows(stack_rows(h) - err, h.rows(), h.cols()));
    out.error_cov.push_back(0.5 * (phi + phi.adjoint()));
  }
  return out;
}

CsiView CsiView::perfect(const ChannelSet& channels) { return CsiView(&channels.composites(), nullptr); }

CsiView CsiView::estimated(const CsitModel& csit) {
  if (csit.estimated.empty() || csit.error_cov.size() != csit.estimated.size()) {
    throw ValidationError("CsiView: CSIT model is missing estimates or covariances");
  }
  return CsiView(&csit.estimated, &csit.error_cov);
}

CsiView CsiView::select(const ChannelSet& channels, const CsitModel& csit) {
  return csit.mode == CsitMode::kPerfect ? perfect(channels) : estimated(csit);
}

namespace {

nlohmann::json complex_to_json(cdouble z) { return nlohmann::json::array({z.real(), z.imag()}); }

cdouble complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json vector_to_json(const CVec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

CVec vector_from_json(const nlohmann::json& j) {
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

}  // namespace

nlohmann::json channels_to_json(const ChannelSet& channels) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index m = 0; m < channels.irs_to_bs().rows(); ++m) {
    rows.push_back(vector_to_json(channels.irs_to_bs().row(m).transpose()));
  }
  nlohmann::json to_irs = nlohmann::json::array();
  nlohmann::json to_bs = nlohmann::json::array();
  for (int k = 0; k < channels.devices(); ++k) {
    to_irs.push_back(vector_to_json(channels.device_to_irs(k)));
    to_bs.push_back(vector_to_json(channels.device_to_bs(k)));
  }
  return {{"irs_to_bs", rows}, {"device_to_irs", to_irs}, {"device_to_bs", to_bs}};
}

ChannelSet channels_from_json(const nlohmann::json& j) {
  try {
    const auto& rows = j.at("irs_to_bs");
    if (rows.empty()) throw ValidationError("irs_to_bs has no rows");
    CMat irs_to_bs(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t m = 0; m < rows.size(); ++m) {
      const CVec row = vector_from_json(rows[m]);
      if (row.size() != irs_to_bs.cols()) throw ValidationError("irs_to_bs rows differ in length");
      irs_to_bs.row(static_cast<Eigen::Index>(m)) = row.transpose();
    }
    std::vector<CVec> to_irs;
    std::vector<CVec> to_bs;
    for (const auto& v : j.at("device_to_irs")) to_irs.push_back(vector_from_json(v));
    for (const auto& v : j.at("device_to_bs")) to_bs.push_back(vector_from_json(v));
    return ChannelSet(std::move(irs_to_bs), std::move(to_irs), std::move(to_bs));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("channel JSON: ") + e.what());
  }
}

}  // namespace rsma
