#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "confglm/baselines.hpp"
#include "confglm/binning.hpp"
#include "confglm/csv.hpp"
#include "confglm/glm.hpp"
#include "confglm/parametric.hpp"
#include "confglm/simulation.hpp"

namespace {

using namespace confglm;

struct DataArgs {
  std::string path;
  std::string response;
  std::vector<std::string> predictors;
  std::string family = "gaussian";
  std::string link = "identity";
  int degree = 1;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.path, "input CSV file")->required();
  cmd->add_option("--response", args.response, "response column")->required();
  cmd->add_option("--predictors", args.predictors,
                  "predictor columns (comma separated)")
      ->required()
      ->delimiter(',');
  cmd->add_option("--family", args.family, "gaussian or gamma");
  cmd->add_option("--link", args.link, "identity, inverse, or log");
  cmd->add_option("--degree", args.degree, "polynomial degree of main effects")
      ->check(CLI::PositiveNumber);
}

ModelSpec spec_from(const DataArgs& args) {
  ModelSpec spec;
  spec.family = family_from_string(args.family);
  spec.link = link_from_string(args.link);
  spec.degree = args.degree;
  spec.validate();
  return spec;
}

LoadedCsv load_for(const DataArgs& args, const ModelSpec& spec) {
  LoadedCsv loaded = load_csv(args.path, args.response, args.predictors);
  const Eigen::Index m =
      1 + spec.degree * static_cast<Eigen::Index>(args.predictors.size());
  if (loaded.data.n() < m + 2)
    throw std::invalid_argument(
        "fewer than " + std::to_string(m + 2) + " complete rows (" +
        std::to_string(loaded.data.n()) + " after dropping " +
        std::to_string(loaded.dropped_rows) + ")");
  return loaded;
}

int run_fit(const DataArgs& args) {
  const ModelSpec spec = spec_from(args);
  const LoadedCsv loaded = load_for(args, spec);
  const Design design = expand_design(loaded.data.x, spec.degree);
  const FittedModel fit = fit_mle(spec, design, loaded.data.y);

  std::cout << "family," << to_string(spec.family) << "\n"
            << "link," << to_string(spec.link) << "\n"
            << "degree," << spec.degree << "\n"
            << "rows," << loaded.data.n() << "\n"
            << "dropped_rows," << loaded.dropped_rows << "\n";
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
    std::cout << "coef_" << j << "," << format_double(fit.beta[j]) << "\n";
  std::cout << "dispersion," << format_double(fit.dispersion) << "\n"
            << "log_likelihood," << format_double(fit.log_likelihood) << "\n"
            << "iterations," << fit.iterations << "\n"
            << "converged," << (fit.converged ? 1 : 0) << "\n";
  return 0;
}

BinPartition partition_for(const LoadedCsv& loaded, int bins,
                           const std::string& bin_col) {
  const auto d = loaded.data.d();
  Vector lo = Vector::Zero(d), hi = Vector::Ones(d);
  if (bin_col.empty()) return BinPartition(lo, hi, bins);

  // Categorical partition: split on one (binary) column only.
  std::vector<int> per_axis(static_cast<std::size_t>(d), 1);
  for (std::size_t j = 0; j < loaded.predictor_scales.size(); ++j)
    if (loaded.predictor_scales[j].name == bin_col) {
      per_axis[j] = 2;
      return BinPartition(lo, hi, per_axis);
    }
  throw std::invalid_argument("--bin-col must name one of the predictors");
}

// Reads predictor columns from a second CSV and maps them through the scales
// fitted on the training data.
Matrix load_query_points(const std::string& path, const LoadedCsv& train) {
  std::vector<std::string> names;
  for (const auto& s : train.predictor_scales) names.push_back(s.name);
  LoadedCsv q = load_csv(path, names.front(), names);
  Matrix x(q.data.n(), q.data.d());
  for (Eigen::Index j = 0; j < q.data.d(); ++j) {
    const ColumnScale& qs = q.predictor_scales[j];
    const ColumnScale& ts = train.predictor_scales[j];
    if (qs.factor != ts.factor ||
        (qs.factor && (qs.level0 != ts.level0 || qs.level1 != ts.level1)))
      throw std::invalid_argument("query column " + ts.name +
                                  " does not match the training levels");
    for (Eigen::Index i = 0; i < q.data.n(); ++i) {
      const double original = qs.to_original(q.data.x(i, j));
      x(i, j) = ts.max > ts.min ? (original - ts.min) / (ts.max - ts.min)
                                : 0.0;
    }
  }
  return x;
}

int run_predict(const DataArgs& args, const std::string& method_name,
                double alpha, double precision, int bins, int grid_points,
                double bandwidth, const std::string& bin_col,
                const std::string& query_path, const std::string& out_path) {
  const Method method = method_from_string(method_name);
  const ModelSpec spec = spec_from(args);
  const LoadedCsv loaded = load_for(args, spec);
  const Dataset& data = loaded.data;

  ConformalConfig cfg;
  cfg.alpha = alpha;
  cfg.precision = precision;
  cfg.validate();

  const int bin_count = bins > 0 ? bins : default_bin_count(data.n());
  const BinPartition partition = partition_for(loaded, bin_count, bin_col);

  ModelSpec ls_spec;
  ls_spec.degree = args.degree;

  const Matrix queries =
      query_path.empty() ? data.x : load_query_points(query_path, loaded);
  const Eigen::Index n_q = queries.rows();

  std::vector<IntervalUnion> regions(static_cast<std::size_t>(n_q));
  switch (method) {
    case Method::hd: {
      const FittedModel fit =
          fit_mle(spec, expand_design(data.x, spec.degree), data.y);
      for (Eigen::Index i = 0; i < n_q; ++i)
        regions[i] = hd_region(fit, queries.row(i).transpose(), alpha);
      break;
    }
    case Method::trans:
      for (Eigen::Index i = 0; i < n_q; ++i)
        regions[i] =
            transform_region(data, spec, queries.row(i).transpose(), cfg);
      break;
    case Method::bin:
      for (Eigen::Index i = 0; i < n_q; ++i)
        regions[i] = binned_region(data, spec, partition,
                                   queries.row(i).transpose(), cfg);
      break;
    case Method::kernel: {
      KernelConfig kcfg;
      kcfg.bandwidth = bandwidth;
      std::map<int, IntervalUnion> cache;
      for (Eigen::Index i = 0; i < n_q; ++i) {
        const Vector x = queries.row(i).transpose();
        const int bin = assign_bin(partition, x);
        auto it = cache.find(bin);
        if (it == cache.end())
          it = cache
                   .emplace(bin, kernel_conformal_region(data, partition, x,
                                                         cfg, kcfg))
                   .first;
        regions[i] = it->second;
      }
      break;
    }
    case Method::ls:
      for (Eigen::Index i = 0; i < n_q; ++i)
        regions[i] = ls_region(data, ls_spec, queries.row(i).transpose(),
                               alpha, grid_points);
      break;
    case Method::lslw:
      for (Eigen::Index i = 0; i < n_q; ++i)
        regions[i] = lslw_region(data, ls_spec, queries.row(i).transpose(),
                                 alpha, grid_points);
      break;
  }

  std::vector<std::string> header{"row_id"};
  for (const auto& s : loaded.predictor_scales) header.push_back(s.name);
  header.insert(header.end(), {"piece_index", "lower", "upper"});

  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < n_q; ++i) {
    for (std::size_t p = 0; p < regions[i].pieces.size(); ++p) {
      std::vector<std::string> row{std::to_string(i)};
      for (Eigen::Index j = 0; j < data.d(); ++j)
        row.push_back(format_double(
            loaded.predictor_scales[j].to_original(queries(i, j))));
      row.push_back(std::to_string(p));
      row.push_back(format_double(regions[i].pieces[p].lower));
      row.push_back(format_double(regions[i].pieces[p].upper));
      rows.push_back(std::move(row));
    }
  }
  write_csv(out_path, header, rows);
  return 0;
}

int run_simulate(const std::string& setting_id, long n, int reps,
                 double shape, double sigma2, double alpha, double precision,
                 std::uint64_t seed, const std::vector<std::string>& methods,
                 int bins, long heldout, bool serial,
                 const std::string& out_path) {
  SimSetting setting;
  if (setting_id == "A")
    setting = SimSetting::A(n, shape);
  else if (setting_id == "B")
    setting = SimSetting::B(n, shape);
  else if (setting_id == "C")
    setting = SimSetting::C(n);
  else
    throw std::invalid_argument("setting must be A, B, or C");
  setting.sigma2 = sigma2;

  std::vector<Method> method_list;
  if (methods.empty())
    method_list = all_methods();
  else
    for (const auto& name : methods)
      method_list.push_back(method_from_string(name));

  StudyOptions opts;
  opts.conformal.precision = precision;
  opts.bins = bins;
  opts.heldout = heldout;
  opts.parallel = !serial;

  const StudyResult result =
      run_study(setting, method_list, reps, alpha, seed, opts);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [method, report] : result.reports) {
    const std::string name = to_string(method);
    rows.push_back({name, "marginal_coverage",
                    format_double(report.marginal_coverage)});
    for (std::size_t k = 0; k < report.local_coverage.size(); ++k)
      rows.push_back({name, "local_coverage_bin_" + std::to_string(k),
                      format_double(report.local_coverage[k])});
    rows.push_back({name, "mean_area", format_double(report.mean_area)});
    rows.push_back(
        {name, "prediction_error", format_double(report.prediction_error)});
    rows.push_back(
        {name, "skipped_reps", std::to_string(result.skipped_reps)});
  }
  write_csv(out_path, {"method", "metric", "value"}, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal prediction regions for GLM regression"};
  app.require_subcommand(1);

  DataArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
  add_data_options(fit_cmd, fit_args);

  DataArgs pred_args;
  std::string method = "trans", bin_col, query_path, pred_out = "regions.csv";
  double alpha = 0.1, precision = 0.005, bandwidth = 0.0;
  int bins = 0, grid_points = 100;
  CLI::App* pred_cmd =
      app.add_subcommand("predict", "conformal regions at the data points");
  add_data_options(pred_cmd, pred_args);
  pred_cmd->add_option("--method", method, "trans|bin|kernel|ls|lslw|hd");
  pred_cmd->add_option("--alpha", alpha, "miscoverage level");
  pred_cmd->add_option("--precision", precision, "region boundary precision");
  pred_cmd->add_option("--bins", bins, "bins per axis (0 = by sample size)");
  pred_cmd->add_option("--grid-points", grid_points,
                       "candidate grid size for ls/lslw");
  pred_cmd->add_option("--bandwidth", bandwidth,
                       "kernel bandwidth (0 = Silverman)");
  pred_cmd->add_option("--bin-col", bin_col,
                       "partition on this binary column only");
  pred_cmd->add_option("--query-data", query_path,
                       "CSV of query points (default: the training rows)");
  pred_cmd->add_option("--out", pred_out, "output CSV path");

  std::string setting_id = "C", sim_out = "report.csv";
  long sim_n = 150, heldout = 0;
  int reps = 50, sim_bins = 0;
  double shape = 2.0, sigma2 = 1.0, sim_alpha = 0.1, sim_precision = 0.005;
  std::uint64_t seed = 1;
  bool serial = false;
  std::vector<std::string> sim_methods;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study");
  sim_cmd->add_option("--setting", setting_id, "A, B, or C");
  sim_cmd->add_option("--n", sim_n, "sample size per replication")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--reps", reps, "replications")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--shape", shape, "gamma shape (settings A, B)");
  sim_cmd->add_option("--sigma2", sigma2, "noise variance (setting C)");
  sim_cmd->add_option("--alpha", sim_alpha, "miscoverage level");
  sim_cmd->add_option("--precision", sim_precision,
                      "region boundary precision");
  sim_cmd->add_option("--seed", seed, "master seed");
  sim_cmd->add_option("--methods", sim_methods,
                      "subset of trans,bin,kernel,ls,lslw,hd")
      ->delimiter(',');
  sim_cmd->add_option("--bins", sim_bins, "bins per axis (0 = by sample size)");
  sim_cmd->add_option("--heldout", heldout,
                      "evaluate on a fresh draw of this size");
  sim_cmd->add_flag("--serial", serial, "disable parallel replications");
  sim_cmd->add_option("--out", sim_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (pred_cmd->parsed())
      return run_predict(pred_args, method, alpha, precision, bins,
                         grid_points, bandwidth, bin_col, query_path,
                         pred_out);
    return run_simulate(setting_id, sim_n, reps, shape, sigma2, sim_alpha,
                        sim_precision, seed, sim_methods, sim_bins, heldout,
                        serial, sim_out);
  } catch (const confglm::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
