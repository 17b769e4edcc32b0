#include "critlab/bubbles.hpp"

#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "critlab/calibration.hpp"
#include "critlab/errors.hpp"

namespace critlab {

void BubbleConfig::validate() const {
  require(dim >= 2, "BubbleConfig: dim must be >= 2");
  if (base) {
    require(base->grid().dim() == dim, "BubbleConfig: base profile dimension mismatch");
  }
  for (std::size_t i = 0; i < bubbles.size(); ++i) {
    const auto& e = bubbles[i];
    const std::string tag = "BubbleConfig: bubble " + std::to_string(i);
    require(e.bubble.scale > 0.0, tag + " has nonpositive scale");
    require(e.bubble.center.size() == dim, tag + " center has wrong dimension");
    require(e.bubble.profile.exps.dim == dim, tag + " profile has wrong dimension");
    require(e.group.dim == dim, tag + " group acts on the wrong dimension");
    require(e.group.complete, tag + " group closure is incomplete");
  }
  if (base && !bubbles.empty()) {
    require(base->grid().p() == bubbles.front().bubble.profile.exps.p,
            "BubbleConfig: base and bubbles use different p");
  }
  for (std::size_t i = 1; i < bubbles.size(); ++i) {
    require(bubbles[i].bubble.profile.exps.p == bubbles.front().bubble.profile.exps.p,
            "BubbleConfig: bubbles use different p");
  }
}

Placement place_bubbles(const BubbleConfig& cfg) {
  cfg.validate();
  Placement out;
  for (const auto& e : cfg.bubbles) {
    const auto pts = orbit(e.group, e.bubble.center);
    out.multiplicity.push_back(pts.size());
    for (const auto& y : pts) {
      out.copies.push_back({y, e.bubble.scale, e.bubble.weight, e.bubble.profile});
    }
  }
  out.separation_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.copies.size(); ++i) {
    for (std::size_t j = i + 1; j < out.copies.size(); ++j) {
      const auto& a = out.copies[i];
      const auto& b = out.copies[j];
      out.separation_ratio = std::min(out.separation_ratio,
                                      (a.center - b.center).norm() / std::max(a.scale, b.scale));
    }
  }
  out.warning = out.separation_ratio < kSeparationWarning;
  return out;
}

namespace {

double bubble_amp(const PlacedBubble& b) {
  const auto& e = b.profile.exps;
  return b.weight * std::pow(b.scale, (e.p - e.dim) / e.p);
}

double base_value(const BubbleConfig& cfg, double r) {
  return cfg.base ? cfg.base->at(r) : 0.0;
}

}  // namespace

double evaluate_config(const BubbleConfig& cfg, const Vector& x) {
  require(x.size() == cfg.dim, "evaluate_config: point has the wrong dimension");
  const auto placed = place_bubbles(cfg);
  double u = base_value(cfg, x.norm());
  for (const auto& b : placed.copies) {
    u += bubble_amp(b) * talenti_eval(b.profile, (x - b.center).norm() / b.scale);
  }
  return u;
}

void MCParams::validate() const {
  require(samples >= kMinMCSamples,
          "MCParams: samples per stratum must be >= " + std::to_string(kMinMCSamples));
}

double talenti_grad_norm_p(const TalentiProfile& profile) {
  const auto& e = profile.exps;
  const double rt = profile.transition_radius();
  auto f = [&](double r) {
    const double s = std::abs(talenti_slope(profile, r));
    return (s > 0.0 && r > 0.0) ? std::exp(e.p * std::log(s) + (e.dim - 1) * std::log(r)) : 0.0;
  };
  const double head = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, rt, 15, 1e-13);
  boost::math::quadrature::exp_sinh<double> tail_rule;
  const double tail = tail_rule.integrate(f, rt, std::numeric_limits<double>::infinity(), 1e-13);
  return sphere_measure(e.dim) * (head + tail);
}

double talenti_lpstar_pow(const TalentiProfile& profile) {
  const auto& e = profile.exps;
  const double q = e.critical();
  const double rt = profile.transition_radius();
  auto f = [&](double r) {
    const double u = talenti_eval(profile, r);
    return (u > 0.0 && r > 0.0) ? std::exp(q * std::log(u) + (e.dim - 1) * std::log(r)) : 0.0;
  };
  const double head = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, rt, 15, 1e-13);
  boost::math::quadrature::exp_sinh<double> tail_rule;
  const double tail = tail_rule.integrate(f, rt, std::numeric_limits<double>::infinity(), 1e-13);
  return sphere_measure(e.dim) * (head + tail);
}

double talenti_phi_infty(const TalentiProfile& profile) {
  const auto& e = profile.exps;
  return talenti_grad_norm_p(profile) / e.p - talenti_lpstar_pow(profile) / e.critical();
}

double talenti_nehari_phi_infty(const TalentiProfile& profile) {
  const auto& e = profile.exps;
  const double a = talenti_grad_norm_p(profile);
  const double b = talenti_lpstar_pow(profile);
  const double Q = a / std::pow(b, e.p / e.critical());
  return std::pow(Q, e.dim / e.p) / e.dim;
}

namespace {

// Integrands accumulated per sample: |grad u|^p, |u|^{p*}, and both minus the
// sums of the per-copy (and v0) contributions.
constexpr int kChannels = 4;
using Channels = std::array<double, kChannels>;

struct Totals {
  Channels mean{};
  std::array<Channels, kChannels> cov{};
  std::size_t samples = 0;
};

enum class ProposalKind { radial, shell };

struct Proposal {
  ProposalKind kind = ProposalKind::radial;
  Vector center;
  double rho0 = 1.0;  // radial: log-logistic scale
  double kappa = 1.0;
  double R1 = 0.0;  // shell
  double R2 = 0.0;
};

class Sampler {
 public:
  Sampler(const BubbleConfig& cfg, Placement placed) : cfg_(cfg), placed_(std::move(placed)) {
    N_ = cfg.dim;
    if (!placed_.copies.empty()) {
      p_ = placed_.copies.front().profile.exps.p;
    } else if (cfg.base) {
      p_ = cfg.base->grid().p();
    }
    sphere_ = sphere_measure(N_);
    const double kappa = (N_ - p_) / (p_ - 1.0);
    Vector centroid = Vector::Zero(N_);
    double reach = 0.0;
    for (const auto& b : placed_.copies) {
      Proposal q;
      q.center = b.center;
      q.rho0 = b.scale * b.profile.transition_radius();
      q.kappa = kappa;
      proposals_.push_back(q);
      centroid += b.center;
      reach = std::max(reach, q.rho0);
    }
    if (!placed_.copies.empty()) centroid /= static_cast<double>(placed_.copies.size());
    if (cfg.base) {
      centroid.setZero();
      reach = std::max(reach, cfg.base->grid().outer());
    }
    for (const auto& b : placed_.copies) reach = std::max(reach, (b.center - centroid).norm());
    if (!proposals_.empty() || cfg.base) {
      Proposal far;
      far.center = centroid;
      far.rho0 = std::max(reach, 1e-300);
      far.kappa = kappa;
      proposals_.push_back(far);
    }
    if (cfg.base) {
      Proposal shell;
      shell.kind = ProposalKind::shell;
      shell.center = Vector::Zero(N_);
      shell.R1 = cfg.base->grid().inner();
      shell.R2 = cfg.base->grid().outer();
      proposals_.push_back(shell);
      shell_volume_ = sphere_ * (std::pow(shell.R2, N_) - std::pow(shell.R1, N_)) / N_;
    }
  }

  std::size_t strata() const { return proposals_.size(); }

  Totals run(const MCParams& mc) const {
    Totals total;
    const std::size_t K = strata();
    if (K == 0) return total;
    std::vector<std::future<Totals>> jobs;
    for (std::size_t k = 0; k < K; ++k) {
      jobs.push_back(std::async(std::launch::async, [this, k, &mc] { return stratum(k, mc); }));
    }
    for (auto& j : jobs) {
      const Totals t = j.get();
      for (int a = 0; a < kChannels; ++a) {
        total.mean[a] += t.mean[a];
        for (int b = 0; b < kChannels; ++b) total.cov[a][b] += t.cov[a][b];
      }
      total.samples += t.samples;
    }
    return total;
  }

 private:
  Totals stratum(std::size_t k, const MCParams& mc) const {
    std::seed_seq seq{static_cast<std::uint64_t>(mc.seed), static_cast<std::uint64_t>(k),
                      static_cast<std::uint64_t>(mc.seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto& q = proposals_[k];
    Vector x(N_);
    Vector dir(N_);
    Channels sum{};
    std::array<Channels, kChannels> sq{};
    const std::size_t n = mc.samples;
    for (std::size_t s = 0; s < n; ++s) {
      for (int i = 0; i < N_; ++i) dir(i) = gauss(rng);
      dir /= dir.norm();
      double rho = 0.0;
      if (q.kind == ProposalKind::radial) {
        double u = unif(rng);
        while (u <= 0.0) u = unif(rng);
        rho = q.rho0 * std::pow(u / (1.0 - u), 1.0 / q.kappa);
      } else {
        const double a = std::pow(q.R1, N_);
        const double b = std::pow(q.R2, N_);
        rho = std::pow(a + (b - a) * unif(rng), 1.0 / N_);
      }
      x = q.center + rho * dir;
      const double dens = mixture_density(x);
      Channels f = integrand(x);
      for (int a = 0; a < kChannels; ++a) {
        const double v = f[a] / dens;
        sum[a] += v;
        f[a] = v;
      }
      for (int a = 0; a < kChannels; ++a) {
        for (int b = 0; b < kChannels; ++b) sq[a][b] += f[a] * f[b];
      }
    }
    Totals t;
    t.samples = n;
    const double dn = static_cast<double>(n);
    for (int a = 0; a < kChannels; ++a) t.mean[a] = sum[a] / dn;
    for (int a = 0; a < kChannels; ++a) {
      for (int b = 0; b < kChannels; ++b) {
        const double c = (sq[a][b] - dn * t.mean[a] * t.mean[b]) / (dn - 1.0);
        t.cov[a][b] = c / dn;
      }
    }
    return t;
  }

  // Sum of the proposal densities (equal sample counts per stratum).
  double mixture_density(const Vector& x) const {
    double total = 0.0;
    for (const auto& q : proposals_) {
      const double rho = (x - q.center).norm();
      if (q.kind == ProposalKind::radial) {
        if (rho <= 0.0) return std::numeric_limits<double>::infinity();
        const double t = std::pow(rho / q.rho0, q.kappa);
        total += q.kappa * t / (sphere_ * std::pow(rho, N_) * (1.0 + t) * (1.0 + t));
      } else if (rho >= q.R1 && rho <= q.R2) {
        total += 1.0 / shell_volume_;
      }
    }
    return total;
  }

  Channels integrand(const Vector& x) const {
    const double p = p_;
    const double ps = N_ * p / (N_ - p);
    Vector grad = Vector::Zero(N_);
    double u = 0.0;
    double grad_parts = 0.0;
    double pow_parts = 0.0;
    for (const auto& b : placed_.copies) {
      const Vector d = x - b.center;
      const double rho = d.norm();
      const double amp = bubble_amp(b);
      const double v = amp * talenti_eval(b.profile, rho / b.scale);
      u += v;
      pow_parts += std::pow(std::abs(v), ps);
      if (rho > 0.0) {
        const double slope = amp / b.scale * talenti_slope(b.profile, rho / b.scale);
        grad += (slope / rho) * d;
        grad_parts += std::pow(std::abs(slope), p);
      }
    }
    if (cfg_.base) {
      const double r = x.norm();
      const double v = cfg_.base->at(r);
      u += v;
      pow_parts += std::pow(std::abs(v), ps);
      if (r > 0.0) {
        const double slope = cfg_.base->slope_at(r);
        grad += (slope / r) * x;
        grad_parts += std::pow(std::abs(slope), p);
      }
    }
    const double G = std::pow(grad.norm(), p);
    const double P = std::pow(std::abs(u), ps);
    return {G, P, G - grad_parts, P - pow_parts};
  }

  const BubbleConfig& cfg_;
  Placement placed_;
  int N_ = 0;
  double p_ = 2.0;
  double sphere_ = 0.0;
  double shell_volume_ = 1.0;
  std::vector<Proposal> proposals_;
};

Totals integrate(const BubbleConfig& cfg, const MCParams& mc, Placement placed) {
  mc.validate();
  Sampler sampler(cfg, std::move(placed));
  return sampler.run(mc);
}

// Linear combination w . channels with its standard error.
MCEstimate combine(const Totals& t, const Channels& w) {
  MCEstimate e;
  e.samples = t.samples;
  double var = 0.0;
  for (int a = 0; a < kChannels; ++a) {
    e.value += w[a] * t.mean[a];
    for (int b = 0; b < kChannels; ++b) var += w[a] * w[b] * t.cov[a][b];
  }
  e.std_error = std::sqrt(std::max(var, 0.0));
  return e;
}

double config_p(const BubbleConfig& cfg) {
  if (!cfg.bubbles.empty()) return cfg.bubbles.front().bubble.profile.exps.p;
  if (cfg.base) return cfg.base->grid().p();
  return 2.0;
}

}  // namespace

MCEstimate config_norm_p(const BubbleConfig& cfg, const MCParams& mc) {
  const auto t = integrate(cfg, mc, place_bubbles(cfg));
  return combine(t, {1.0, 0.0, 0.0, 0.0});
}

MCEstimate config_phi_infty(const BubbleConfig& cfg, const MCParams& mc) {
  const auto t = integrate(cfg, mc, place_bubbles(cfg));
  const double p = config_p(cfg);
  const double ps = cfg.dim * p / (cfg.dim - p);
  return combine(t, {1.0 / p, -1.0 / ps, 0.0, 0.0});
}

MCEstimate projected_energy(const BubbleConfig& cfg, const MCParams& mc) {
  const auto t = integrate(cfg, mc, place_bubbles(cfg));
  const double p = config_p(cfg);
  const double N = cfg.dim;
  const double ps = N * p / (N - p);
  const double a = t.mean[0];
  const double b = t.mean[1];
  MCEstimate e;
  e.samples = t.samples;
  if (!(a > 0.0 && b > 0.0)) return e;
  // E = (a / b^{p/p*})^{N/p} / N; log E = (N/p) log a - (N/p*) log b - log N.
  e.value = std::pow(a / std::pow(b, p / ps), N / p) / N;
  const double da = e.value * (N / p) / a;
  const double db = -e.value * (N / ps) / b;
  const double var = da * da * t.cov[0][0] + 2.0 * da * db * t.cov[0][1] + db * db * t.cov[1][1];
  e.std_error = std::sqrt(std::max(var, 0.0));
  return e;
}

double AdditivityReport::deviation() const {
  return std::max(norm_deviation.value, energy_deviation.value);
}

AdditivityReport additivity_check(const BubbleConfig& cfg, const MCParams& mc) {
  require(!cfg.bubbles.empty(), "additivity_check: at least one bubble is required");
  AdditivityReport rep;
  rep.placement = place_bubbles(cfg);
  const double p = config_p(cfg);
  const double ps = cfg.dim * p / (cfg.dim - p);

  if (cfg.base) {
    rep.norm_prediction += grad_norm_p(*cfg.base);
    rep.energy_prediction += energy_J(*cfg.base);
  }
  for (std::size_t i = 0; i < cfg.bubbles.size(); ++i) {
    const auto& b = cfg.bubbles[i].bubble;
    const double mult = static_cast<double>(rep.placement.multiplicity[i]);
    const double a = std::pow(std::abs(b.weight), p) * talenti_grad_norm_p(b.profile);
    const double c = std::pow(std::abs(b.weight), ps) * talenti_lpstar_pow(b.profile);
    rep.norm_prediction += mult * a;
    rep.energy_prediction += mult * (a / p - c / ps);
  }

  const auto t = integrate(cfg, mc, rep.placement);
  rep.norm_total = combine(t, {1.0, 0.0, 0.0, 0.0});
  rep.energy_total = combine(t, {1.0 / p, -1.0 / ps, 0.0, 0.0});
  const MCEstimate dn = combine(t, {0.0, 0.0, 1.0, 0.0});
  const MCEstimate de = combine(t, {0.0, 0.0, 1.0 / p, -1.0 / ps});
  auto relative = [](const MCEstimate& d, double pred) {
    MCEstimate r;
    r.samples = d.samples;
    r.value = std::abs(d.value) / std::abs(pred);
    r.std_error = d.std_error / std::abs(pred);
    return r;
  };
  rep.norm_deviation = relative(dn, rep.norm_prediction);
  rep.energy_deviation = relative(de, rep.energy_prediction);
  return rep;
}

QuantumReport energy_quantum_check(const TalentiProfile& profile, const QuantumOptions& opts) {
  const auto& e = profile.exps;
  e.validate();
  QuantumReport rep;
  rep.phi = talenti_phi_infty(profile);
  rep.projected_phi = talenti_nehari_phi_infty(profile);
  rep.c_infty = opts.c_infty > 0.0 ? opts.c_infty : sobolev_constant(e.dim, e.p).c_infty;
  rep.tolerance = opts.c_infty_rel_tol * rep.c_infty + 1e-8 * std::abs(rep.projected_phi);
  rep.above_quantum = rep.projected_phi >= rep.c_infty - rep.tolerance;

  const auto fam = build_family(AnnulusSpec{opts.R1, opts.R2, e}, 2, opts.cells_per_piece);
  rep.two_cap_level = energy_J(nehari_project(sign_changing_candidate(fam)));
  rep.two_cap_ok = rep.two_cap_level >= 2.0 * rep.c_infty * (1.0 - opts.two_cap_rel_tol);
  return rep;
}

}  // namespace critlab
