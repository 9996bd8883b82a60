#include "confglm/simulation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "confglm/baselines.hpp"
#include "confglm/binning.hpp"
#include "confglm/parametric.hpp"
#include "confglm/rng.hpp"

namespace confglm {

std::string to_string(Method m) {
  switch (m) {
    case Method::trans:
      return "trans";
    case Method::bin:
      return "bin";
    case Method::kernel:
      return "kernel";
    case Method::ls:
      return "ls";
    case Method::lslw:
      return "lslw";
    case Method::hd:
      return "hd";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : all_methods())
    if (to_string(m) == s) return m;
  throw std::invalid_argument(
      "unknown method '" + s + "' (valid: trans, bin, kernel, ls, lslw, hd)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::trans, Method::bin,
                                              Method::kernel, Method::ls,
                                              Method::lslw,  Method::hd};
  return methods;
}

// ----- settings -----

namespace {

void add_specs(SimSetting& s, const ModelSpec& parametric,
               const ModelSpec& least_squares) {
  s.fit_specs[Method::trans] = parametric;
  s.fit_specs[Method::bin] = parametric;
  s.fit_specs[Method::hd] = parametric;
  s.fit_specs[Method::ls] = least_squares;
  s.fit_specs[Method::lslw] = least_squares;
}

}  // namespace

SimSetting SimSetting::A(Eigen::Index n, double shape) {
  SimSetting s;
  s.id = 'A';
  s.n = n;
  s.true_beta = Vector::Zero(2);
  s.true_beta << 1.25, -1.0;
  s.shape = shape;
  add_specs(s, {Family::gamma, Link::inverse, 1},
            {Family::gaussian, Link::identity, 3});
  return s;
}

SimSetting SimSetting::B(Eigen::Index n, double shape) {
  SimSetting s;
  s.id = 'B';
  s.n = n;
  s.true_beta = Vector::Zero(2);
  s.true_beta << 0.5, 1.0;
  s.shape = shape;
  // The whole battery fits the same (misspecified) cubic gaussian model.
  add_specs(s, {Family::gaussian, Link::identity, 3},
            {Family::gaussian, Link::identity, 3});
  return s;
}

SimSetting SimSetting::C(Eigen::Index n) {
  SimSetting s;
  s.id = 'C';
  s.n = n;
  s.true_beta = Vector::Zero(2);
  s.true_beta << 2.0, 5.0;
  add_specs(s, {Family::gaussian, Link::identity, 1},
            {Family::gaussian, Link::identity, 1});
  return s;
}

const ModelSpec& SimSetting::spec_for(Method m) const {
  auto it = fit_specs.find(m);
  if (it == fit_specs.end())
    throw std::invalid_argument("no model spec configured for method " +
                                to_string(m));
  return it->second;
}

double SimSetting::response_sd() const {
  if (id != 'C') return 1.0;
  const double slope = true_beta[1];
  return std::sqrt(slope * slope / 12.0 + sigma2);
}

void SimSetting::validate() const {
  if (id != 'A' && id != 'B' && id != 'C')
    throw std::invalid_argument("setting id must be A, B, or C");
  if (n < 10) throw std::invalid_argument("setting needs n >= 10");
  if (true_beta.size() != 2)
    throw std::invalid_argument("true_beta must have two entries");
  if (id == 'C') {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  } else {
    if (!(shape > 0.0)) throw std::invalid_argument("shape must be > 0");
    // Rate positivity over the whole predictor support.
    if (!(true_beta[0] > 0.0) || !(true_beta[0] + true_beta[1] > 0.0))
      throw std::invalid_argument("x'beta must stay positive on [0,1]");
  }
}

// ----- generation -----

namespace {

Dataset draw(const SimSetting& setting, Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, 1);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) data.x(i, 0) = rng.uniform();
  if (setting.id == 'C') {
    const double sd = std::sqrt(setting.sigma2);
    for (Eigen::Index i = 0; i < n; ++i)
      data.y[i] = setting.true_beta[0] + setting.true_beta[1] * data.x(i, 0) +
                  sd * rng.normal();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double rate =
          setting.shape *
          (setting.true_beta[0] + setting.true_beta[1] * data.x(i, 0));
      data.y[i] = rng.gamma(setting.shape, rate);
    }
  }
  return data;
}

}  // namespace

Dataset generate(const SimSetting& setting, const SeedSpec& seed) {
  setting.validate();
  return draw(setting, setting.n, mix_seed(seed.master, seed.rep, 0));
}

// ----- study driver -----

namespace {

struct MethodMetrics {
  CoverageBreakdown cov;
  double area = 0.0;
  double pred_err = 0.0;
  long rejected = 0;
  long empties = 0;
};

struct RepOutcome {
  bool ok = false;
  std::vector<MethodMetrics> metrics;  // parallel to the methods argument
};

std::vector<IntervalUnion> regions_for_method(
    Method m, const SimSetting& setting, const Dataset& train,
    const Matrix& eval_x, const BinPartition& partition,
    const ConformalConfig& cfg, int grid_points, long& rejected) {
  const auto n_eval = eval_x.rows();
  std::vector<IntervalUnion> regions;
  regions.reserve(n_eval);
  RegionStats stats;

  switch (m) {
    case Method::hd: {
      const ModelSpec& spec = setting.spec_for(m);
      FittedModel fit =
          fit_mle(spec, expand_design(train.x, spec.degree), train.y);
      for (Eigen::Index i = 0; i < n_eval; ++i)
        regions.push_back(
            hd_region(fit, eval_x.row(i).transpose(), cfg.alpha));
      break;
    }
    case Method::trans: {
      const ModelSpec& spec = setting.spec_for(m);
      for (Eigen::Index i = 0; i < n_eval; ++i)
        regions.push_back(transform_region(train, spec,
                                           eval_x.row(i).transpose(), cfg,
                                           &stats));
      break;
    }
    case Method::bin: {
      const ModelSpec& spec = setting.spec_for(m);
      for (Eigen::Index i = 0; i < n_eval; ++i)
        regions.push_back(binned_region(train, spec, partition,
                                        eval_x.row(i).transpose(), cfg,
                                        &stats));
      break;
    }
    case Method::kernel: {
      // The region depends on x only through its bin.
      std::map<int, IntervalUnion> cache;
      for (Eigen::Index i = 0; i < n_eval; ++i) {
        const Vector x = eval_x.row(i).transpose();
        const int bin = assign_bin(partition, x);
        auto it = cache.find(bin);
        if (it == cache.end())
          it = cache
                   .emplace(bin, kernel_conformal_region(train, partition, x,
                                                         cfg, {}, &stats))
                   .first;
        regions.push_back(it->second);
      }
      break;
    }
    case Method::ls:
    case Method::lslw: {
      const ModelSpec& spec = setting.spec_for(m);
      for (Eigen::Index i = 0; i < n_eval; ++i) {
        const Vector x = eval_x.row(i).transpose();
        regions.push_back(m == Method::ls
                              ? ls_region(train, spec, x, cfg.alpha,
                                          grid_points)
                              : lslw_region(train, spec, x, cfg.alpha,
                                            grid_points));
      }
      break;
    }
  }
  rejected += stats.warnings;
  return regions;
}

RepOutcome run_one_rep(const SimSetting& setting,
                       const std::vector<Method>& methods, double alpha,
                       std::uint64_t master_seed, std::uint64_t rep,
                       const StudyOptions& opts, const BinPartition& partition) {
  RepOutcome out;
  Dataset train = draw(setting, setting.n, mix_seed(master_seed, rep, 0));

  Dataset eval;
  if (opts.heldout > 0)
    eval = draw(setting, opts.heldout, mix_seed(master_seed, rep, 1));
  else
    eval = train;

  const double sd = setting.response_sd();
  if (sd != 1.0) {
    train.y /= sd;
    if (opts.heldout > 0) eval.y /= sd;
    else eval.y = train.y;
  }

  ConformalConfig cfg = opts.conformal;
  cfg.alpha = alpha;
  cfg.validate();

  out.metrics.resize(methods.size());
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodMetrics& mm = out.metrics[mi];
    auto regions =
        regions_for_method(methods[mi], setting, train, eval.x, partition,
                           cfg, opts.grid_points, mm.rejected);
    mm.cov = coverage(regions, eval.y, eval.x, &partition, opts.fine_slices);
    mm.area = mean_area(regions);
    mm.pred_err = prediction_error(regions, eval.y, &mm.empties);
  }
  out.ok = true;
  return out;
}

StudyResult aggregate(const std::vector<Method>& methods, int reps,
                      const std::vector<RepOutcome>& outcomes) {
  StudyResult result;
  result.reps = reps;

  int used = 0;
  for (const auto& o : outcomes)
    if (o.ok) ++used;
  result.skipped_reps = reps - used;
  if (used == 0) throw NumericError("all replications failed");

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    DiagnosticsReport rep;
    rep.method = to_string(methods[mi]);

    double area = 0.0, perr = 0.0;
    long covered = 0, points = 0;
    std::vector<long> loc_cov, loc_cnt, cond_cov, cond_cnt;
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      const MethodMetrics& mm = o.metrics[mi];
      area += mm.area;
      perr += mm.pred_err;
      covered += mm.cov.covered;
      points += mm.cov.n_points;
      rep.warnings.rejected_candidates += mm.rejected;
      rep.warnings.empty_regions += mm.empties;
      if (loc_cov.empty()) {
        loc_cov.assign(mm.cov.local_covered.size(), 0);
        loc_cnt.assign(mm.cov.local_count.size(), 0);
        cond_cov.assign(mm.cov.cond_covered.size(), 0);
        cond_cnt.assign(mm.cov.cond_count.size(), 0);
      }
      for (std::size_t k = 0; k < loc_cov.size(); ++k) {
        loc_cov[k] += mm.cov.local_covered[k];
        loc_cnt[k] += mm.cov.local_count[k];
      }
      for (std::size_t k = 0; k < cond_cov.size(); ++k) {
        cond_cov[k] += mm.cov.cond_covered[k];
        cond_cnt[k] += mm.cov.cond_count[k];
      }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.marginal_coverage =
        points > 0 ? static_cast<double>(covered) / static_cast<double>(points)
                   : nan;
    rep.local_coverage.resize(loc_cov.size());
    for (std::size_t k = 0; k < loc_cov.size(); ++k)
      rep.local_coverage[k] =
          loc_cnt[k] > 0 ? static_cast<double>(loc_cov[k]) /
                               static_cast<double>(loc_cnt[k])
                         : nan;
    rep.conditional_coverage.resize(cond_cov.size());
    for (std::size_t k = 0; k < cond_cov.size(); ++k)
      rep.conditional_coverage[k] =
          cond_cnt[k] > 0 ? static_cast<double>(cond_cov[k]) /
                                static_cast<double>(cond_cnt[k])
                          : nan;
    rep.mean_area = area / used;
    rep.prediction_error = perr / used;
    rep.n_points = points;
    result.reports[methods[mi]] = std::move(rep);
  }
  return result;
}

}  // namespace

StudyResult run_study(const SimSetting& setting,
                      const std::vector<Method>& methods, int reps,
                      double alpha, std::uint64_t master_seed,
                      const StudyOptions& opts) {
  setting.validate();
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (opts.heldout < 0) throw std::invalid_argument("heldout must be >= 0");

  const int bins = opts.bins > 0 ? opts.bins : default_bin_count(setting.n);
  Vector lo = Vector::Zero(1), hi = Vector::Ones(1);
  const BinPartition partition(lo, hi, bins);

  std::vector<RepOutcome> outcomes(reps);
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (int r = 0; r < reps; ++r) {
    try {
      outcomes[r] = run_one_rep(setting, methods, alpha, master_seed,
                                static_cast<std::uint64_t>(r), opts,
                                partition);
    } catch (const std::exception&) {
      outcomes[r].ok = false;
    }
  }
  return aggregate(methods, reps, outcomes);
}

StudyResult run_study_serial(const SimSetting& setting,
                             const std::vector<Method>& methods, int reps,
                             double alpha, std::uint64_t master_seed,
                             StudyOptions opts) {
  opts.parallel = false;
  return run_study(setting, methods, reps, alpha, master_seed, opts);
}

}  // namespace confglm
