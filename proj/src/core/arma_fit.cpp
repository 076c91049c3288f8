/*
 * Copyright 2026 The qharma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "qharma/arma_fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qharma/error.hpp"
#include "qharma/modification.hpp"
#include "qharma/parallel.hpp"
#include "qharma/synthesis.hpp"

namespace qharma {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

// Residuals and Jacobian of the fit loss over the packed parameter vector
// [ln G, ar_1, ma_1, ar_2, ma_2, ...].
class FitModel {
 public:
  FitModel(const FitTarget& target, const ArmaOrders& orders,
           const FitOptions& options)
      : target_(target), options_(options),
        np_(static_cast<std::size_t>(orders.ar_per_section())),
        nq_(static_cast<std::size_t>(orders.ma_per_section())),
        r_(static_cast<std::size_t>(orders.r)) {
    const std::size_t pmax = std::max(np_, nq_);
    powers_.resize(target.size() * pmax);
    for (std::size_t k = 0; k < target.size(); ++k) {
      const cplx zinv = std::polar(1.0, -kTwoPi * target.freqs_hz[k] / target.sample_rate);
      cplx z = 1.0;
      for (std::size_t p = 0; p < pmax; ++p) {
        z *= zinv;
        powers_[k * pmax + p] = z;
      }
    }
    pmax_ = pmax;
    for (std::size_t k = 0; k < target.size(); ++k) {
      if (target.amplitudes[k] > options.epsilon) phase_rows_.push_back(k);
    }
  }

  std::size_t num_params() const { return 1 + r_ * (np_ + nq_); }
  std::size_t num_residuals() const { return target_.size() + phase_rows_.size(); }

  ArmaFrame Unpack(const VectorXd& theta) const {
    ArmaFrame f;
    f.gain = std::exp(theta(0));
    f.sections.resize(r_);
    Eigen::Index i = 1;
    for (auto& s : f.sections) {
      s.ar.resize(np_);
      s.ma.resize(nq_);
      for (auto& v : s.ar) v = theta(i++);
      for (auto& v : s.ma) v = theta(i++);
    }
    return f;
  }

  VectorXd Pack(const ArmaFrame& f) const {
    VectorXd theta(static_cast<Eigen::Index>(num_params()));
    theta(0) = std::log(f.gain);
    Eigen::Index i = 1;
    for (const auto& s : f.sections) {
      for (double v : s.ar) theta(i++) = v;
      for (double v : s.ma) theta(i++) = v;
    }
    return theta;
  }

  // Fills the residuals (and the Jacobian if given); false on a non-finite
  // response.
  bool Evaluate(const VectorXd& theta, VectorXd& res, MatrixXd* jac) const {
    const std::size_t K = target_.size();
    const double eps = options_.epsilon;
    const double w = std::sqrt(options_.phase_weight);
    res.resize(static_cast<Eigen::Index>(num_residuals()));
    if (jac) jac->setZero(static_cast<Eigen::Index>(num_residuals()),
                          static_cast<Eigen::Index>(num_params()));
    std::vector<cplx> dar(r_ * np_), dma(r_ * nq_);
    std::size_t phase_row = K;
    std::size_t next_phase = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const cplx* zp = powers_.data() + k * pmax_;
      double logmag = theta(0);
      double angle = 0.0;
      Eigen::Index col = 1;
      for (std::size_t j = 0; j < r_; ++j) {
        cplx a = 1.0, b = 1.0;
        for (std::size_t p = 0; p < np_; ++p) a += theta(col + static_cast<Eigen::Index>(p)) * zp[p];
        for (std::size_t q = 0; q < nq_; ++q) {
          b += theta(col + static_cast<Eigen::Index>(np_ + q)) * zp[q];
        }
        const double ma = std::abs(a), mb = std::abs(b);
        if (!(ma >= 1e-12) || !(mb > 0.0)) return false;
        logmag += std::log(mb) - std::log(ma);
        angle += std::arg(b / a);
        if (jac) {
          const cplx ia = -1.0 / a, ib = 1.0 / b;
          for (std::size_t p = 0; p < np_; ++p) dar[j * np_ + p] = zp[p] * ia;
          for (std::size_t q = 0; q < nq_; ++q) dma[j * nq_ + q] = zp[q] * ib;
        }
        col += static_cast<Eigen::Index>(np_ + nq_);
      }
      const double mag = std::exp(logmag);
      if (!std::isfinite(mag)) return false;
      res(static_cast<Eigen::Index>(k)) =
          std::log(mag + eps) - std::log(target_.amplitudes[k] + eps);
      const bool has_phase = next_phase < phase_rows_.size() && phase_rows_[next_phase] == k;
      if (has_phase) {
        res(static_cast<Eigen::Index>(phase_row)) = w * WrapPhase(angle - target_.phases[k]);
      }
      if (jac) {
        const double c = mag / (mag + eps);
        const auto row = static_cast<Eigen::Index>(k);
        (*jac)(row, 0) = c;
        Eigen::Index cc = 1;
        for (std::size_t j = 0; j < r_; ++j) {
          for (std::size_t p = 0; p < np_; ++p, ++cc) {
            const cplx d = dar[j * np_ + p];
            (*jac)(row, cc) = c * d.real();
            if (has_phase) (*jac)(static_cast<Eigen::Index>(phase_row), cc) = w * d.imag();
          }
          for (std::size_t q = 0; q < nq_; ++q, ++cc) {
            const cplx d = dma[j * nq_ + q];
            (*jac)(row, cc) = c * d.real();
            if (has_phase) (*jac)(static_cast<Eigen::Index>(phase_row), cc) = w * d.imag();
          }
        }
      }
      if (has_phase) {
        ++phase_row;
        ++next_phase;
      }
    }
    return true;
  }

  // Projects every section onto stable AR polynomials in place.
  void Project(VectorXd& theta) const {
    Eigen::Index col = 1;
    std::vector<double> ar(np_);
    for (std::size_t j = 0; j < r_; ++j) {
      for (std::size_t p = 0; p < np_; ++p) ar[p] = theta(col + static_cast<Eigen::Index>(p));
      if (ProjectStable(ar, options_.max_pole_radius, options_.projection_radius)) {
        for (std::size_t p = 0; p < np_; ++p) theta(col + static_cast<Eigen::Index>(p)) = ar[p];
      }
      col += static_cast<Eigen::Index>(np_ + nq_);
    }
  }

 private:
  const FitTarget& target_;
  const FitOptions& options_;
  std::size_t np_, nq_, r_;
  std::size_t pmax_ = 0;
  std::vector<cplx> powers_;
  std::vector<std::size_t> phase_rows_;
};

// Trial point evaluation: project, then loss (infinite if not finite).
double TrialLoss(const FitModel& model, VectorXd& theta, VectorXd& res) {
  model.Project(theta);
  if (!theta.allFinite() || !model.Evaluate(theta, res, nullptr)) return INFINITY;
  const double loss = res.squaredNorm();
  return std::isfinite(loss) ? loss : INFINITY;
}

void RunLevenbergMarquardt(const FitModel& model, const FitOptions& options,
                           VectorXd& theta, FitResult& result) {
  const auto m = static_cast<Eigen::Index>(model.num_residuals());
  const auto n = static_cast<Eigen::Index>(model.num_params());
  VectorXd res, trial_res;
  MatrixXd jac;
  model.Evaluate(theta, res, &jac);
  double loss = res.squaredNorm();
  const double target = options.target_loss * static_cast<double>(m);
  double mu = 1e-3;
  int rejections = 0;
  while (result.steps < options.max_steps && loss > target) {
    VectorXd scale = jac.colwise().squaredNorm().transpose();
    const double top = scale.maxCoeff();
    if (!(top > 0.0)) break;
    for (Eigen::Index i = 0; i < n; ++i) scale(i) = 1.0 / std::sqrt(std::max(scale(i), 1e-12 * top));
    const MatrixXd js = jac * scale.asDiagonal();
    const bool wide = m < n;
    MatrixXd gram = MatrixXd::Zero(wide ? m : n, wide ? m : n);
    if (wide) {
      gram.selfadjointView<Eigen::Lower>().rankUpdate(js);
    } else {
      gram.selfadjointView<Eigen::Lower>().rankUpdate(js.transpose());
    }
    const VectorXd rhs = wide ? VectorXd(res) : VectorXd(js.transpose() * res);
    bool accepted = false;
    while (result.steps < options.max_steps) {
      ++result.steps;
      MatrixXd damped = gram;
      damped.diagonal().array() += mu;
      Eigen::LLT<MatrixXd, Eigen::Lower> llt(damped);
      VectorXd step;
      if (llt.info() == Eigen::Success) {
        const VectorXd y = llt.solve(rhs);
        step = wide ? VectorXd(-(scale.asDiagonal() * (js.transpose() * y)))
                    : VectorXd(-(scale.asDiagonal() * y));
      }
      VectorXd trial = theta;
      double trial_loss = INFINITY;
      if (step.size() == n && step.allFinite()) {
        trial += step;
        trial_loss = TrialLoss(model, trial, trial_res);
      }
      if (trial_loss < loss) {
        const double drop = (loss - trial_loss) / loss;
        theta = trial;
        loss = trial_loss;
        result.loss_history.push_back(loss);
        mu = std::max(mu / 3.0, 1e-15);
        rejections = 0;
        accepted = true;
        if (drop < options.tolerance) return;
        break;
      }
      mu *= 4.0;
      if (++rejections >= options.max_rejections || !(mu < 1e30)) {
        result.flags |= kFitStalled;
        return;
      }
    }
    if (!accepted) return;
    model.Evaluate(theta, res, &jac);
  }
}

void RunGradientDescent(const FitModel& model, const FitOptions& options,
                        VectorXd& theta, FitResult& result) {
  VectorXd res, trial_res;
  MatrixXd jac;
  model.Evaluate(theta, res, &jac);
  double loss = res.squaredNorm();
  const double target = options.target_loss * static_cast<double>(res.size());
  double alpha = 1e-2;
  while (result.steps < options.max_steps && loss > target) {
    const VectorXd grad = 2.0 * jac.transpose() * res;
    const double g2 = grad.squaredNorm();
    if (!(g2 > 0.0)) return;
    alpha *= 2.0;
    bool accepted = false;
    int tries = 0;
    while (result.steps < options.max_steps) {
      ++result.steps;
      VectorXd trial = theta - alpha * grad;
      const double trial_loss = TrialLoss(model, trial, trial_res);
      if (trial_loss <= loss - 1e-4 * alpha * g2 && trial_loss < loss) {
        const double drop = (loss - trial_loss) / loss;
        theta = trial;
        loss = trial_loss;
        result.loss_history.push_back(loss);
        accepted = true;
        if (drop < options.tolerance) return;
        break;
      }
      alpha *= 0.5;
      if (++tries >= 40) break;
    }
    if (!accepted) {
      result.flags |= kFitStalled;
      return;
    }
    model.Evaluate(theta, res, &jac);
  }
}

// Identical sections stay identical under any update that treats them
// alike, so each one starts from a weak pole pair in its own band.
void SeedSections(ArmaFrame& frame, double radius, double offset) {
  if (radius <= 0.0) return;
  const double r = static_cast<double>(frame.sections.size());
  for (std::size_t j = 0; j < frame.sections.size(); ++j) {
    auto& ar = frame.sections[j].ar;
    std::fill(ar.begin(), ar.end(), 0.0);
    std::fill(frame.sections[j].ma.begin(), frame.sections[j].ma.end(), 0.0);
    if (ar.empty()) continue;
    const double theta = kPi * (static_cast<double>(j) + offset) / r;
    if (ar.size() >= 2) {
      ar[0] = -2.0 * radius * std::cos(theta);
      ar[1] = radius * radius;
    } else {
      ar[0] = -radius * std::cos(theta);
    }
  }
}

}  // namespace

const char* FitMethodName(FitMethod method) {
  return method == FitMethod::kGradientDescent ? "gd" : "lm";
}

FitMethod ParseFitMethod(const std::string& name) {
  if (name == "lm") return FitMethod::kLevenbergMarquardt;
  if (name == "gd") return FitMethod::kGradientDescent;
  Fail(ErrorCode::kInvalidArgument, "unknown fit method: " + name);
}

void FitTarget::Validate() const {
  if (amplitudes.size() != freqs_hz.size() || phases.size() != freqs_hz.size()) {
    Fail(ErrorCode::kDimensionMismatch, "fit target arrays differ in length");
  }
  Require(sample_rate > 0, "fit target has no sample rate");
  for (std::size_t k = 0; k < size(); ++k) {
    Require(std::isfinite(freqs_hz[k]) && freqs_hz[k] >= 0.0 &&
                freqs_hz[k] <= 0.5 * sample_rate,
            "target frequencies must lie in [0, Nyquist]");
    Require(std::isfinite(amplitudes[k]) && amplitudes[k] >= 0.0,
            "target amplitudes must be finite and non-negative");
    Require(std::isfinite(phases[k]), "target phases must be finite");
  }
}

double FitLoss(const ArmaFrame& frame, const FitTarget& target,
               const FitOptions& options) {
  target.Validate();
  const EnvelopeSample s = SampleHarmonics(frame, target.freqs_hz, target.sample_rate);
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double dm = std::log(target.amplitudes[k] + options.epsilon) -
                      std::log(s.magnitude[k] + options.epsilon);
    loss += dm * dm;
    if (target.amplitudes[k] > options.epsilon) {
      const double dp = WrapPhase(target.phases[k] - s.delay[k]);
      loss += options.phase_weight * dp * dp;
    }
  }
  return loss;
}

FitResult FitFrame(const FitTarget& target, const ArmaOrders& orders,
                   const FitOptions& options) {
  orders.Validate();
  target.Validate();
  Require(options.epsilon > 0.0 && options.phase_weight >= 0.0 && options.max_steps >= 0,
          "invalid fit options");
  FitResult result;
  result.frame = IdentityFrame(orders);
  if (2 * target.size() < static_cast<std::size_t>(orders.num_params())) {
    result.flags |= kFitUnderdetermined;
  }
  double mean = 0.0;
  for (double a : target.amplitudes) mean += a;
  mean = target.size() ? mean / static_cast<double>(target.size()) : 0.0;
  if (!(mean > options.epsilon)) {
    result.frame.gain = options.epsilon;
    result.flags |= kFitDegenerate;
    result.initial_loss = result.loss =
        target.size() ? FitLoss(result.frame, target, options) : 0.0;
    return result;
  }
  result.frame.gain = mean;
  const FitModel model(target, orders, options);
  VectorXd theta = model.Pack(result.frame);
  VectorXd res;
  if (!model.Evaluate(theta, res, nullptr) || !std::isfinite(res.squaredNorm())) {
    result.flags |= kFitNonFinite;
    return result;
  }
  result.initial_loss = result.loss = res.squaredNorm();
  if (result.loss <= options.target_loss * static_cast<double>(res.size())) return result;
  const double restart_level = options.restart_loss * static_cast<double>(res.size());
  const double mean_gain = result.frame.gain;
  FitResult best;
  bool have_best = false;
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    FitResult trial;
    trial.flags = result.flags;
    trial.frame = result.frame;
    trial.frame.gain = mean_gain;
    // Seed angles step through the half-open unit interval by the golden
    // ratio so successive restarts interleave.
    const double offset = std::fmod(0.5 + 0.6180339887498949 * attempt, 1.0);
    SeedSections(trial.frame, options.seed_radius, offset);
    theta = model.Pack(trial.frame);
    if (!model.Evaluate(theta, res, nullptr) || !std::isfinite(res.squaredNorm())) {
      trial.flags |= kFitNonFinite;
      trial.initial_loss = trial.loss = INFINITY;
    } else {
      trial.initial_loss = res.squaredNorm();
      if (options.method == FitMethod::kLevenbergMarquardt) {
        RunLevenbergMarquardt(model, options, theta, trial);
      } else {
        RunGradientDescent(model, options, theta, trial);
      }
      trial.frame = model.Unpack(theta);
      trial.loss = trial.loss_history.empty() ? trial.initial_loss : trial.loss_history.back();
    }
    trial.steps += have_best ? best.steps : 0;
    if (!have_best || trial.loss < best.loss) {
      best = std::move(trial);
      have_best = true;
    } else {
      best.steps = trial.steps;
    }
    if (best.loss <= restart_level || options.seed_radius <= 0.0) break;
  }
  result = std::move(best);
  if (!std::isfinite(result.loss)) result.flags |= kFitNonFinite;
  return result;
}

std::vector<FitTarget> CascadeTargets(const HarmonicSet& set,
                                      const HarmonicRule& rule) {
  set.Validate();
  const F0Track track = set.Track();
  const ScaleSchedule identity = ScaleSchedule::Identity(track);
  const BankPair banks = ScaledFreqs(track, identity, set.sample_rate, rule);
  const FrameMatrix voiced_exc = ExcitationPhase(banks.voiced.freqs, set.grid.centers);
  const FrameMatrix unvoiced_exc = ExcitationPhase(banks.unvoiced.freqs, set.grid.centers);
  std::vector<FitTarget> targets(set.num_frames());
  for (std::size_t l = 0; l < set.num_frames(); ++l) {
    const bool voiced = track.voiced(l);
    const Bank& bank = voiced ? banks.voiced : banks.unvoiced;
    const FrameMatrix& exc = voiced ? voiced_exc : unvoiced_exc;
    FitTarget& t = targets[l];
    t.sample_rate = set.sample_rate;
    const std::size_t count = std::min(bank.freqs.components(), set.num_components());
    for (std::size_t k = 0; k < count; ++k) {
      if (bank.gate(l, k) == 0.0 || set.freqs(l, k) <= 0.0) continue;
      t.freqs_hz.push_back(bank.freqs(l, k));
      t.amplitudes.push_back(set.amps(l, k));
      t.phases.push_back(WrapPhase(set.phases(l, k) - exc(l, k)));
    }
  }
  return targets;
}

ArmaCascade FitCascade(const HarmonicSet& set, const ArmaOrders& orders,
                       const FitOptions& options, const HarmonicRule& rule,
                       int threads) {
  orders.Validate();
  const std::vector<FitTarget> targets = CascadeTargets(set, rule);
  ArmaCascade cascade;
  cascade.orders = orders;
  cascade.grid = set.grid;
  cascade.sample_rate = set.sample_rate;
  cascade.frames.resize(targets.size());
  cascade.flags.assign(targets.size(), 0);
  cascade.losses.assign(targets.size(), 0.0);
  ParallelFor(targets.size(), threads, [&](std::size_t l) {
    FitResult r = FitFrame(targets[l], orders, options);
    cascade.frames[l] = std::move(r.frame);
    cascade.flags[l] = r.flags;
    cascade.losses[l] = r.loss;
  });
  return cascade;
}

}  // namespace qharma
