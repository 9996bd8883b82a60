// Timing comparison between the serial reference paths and the OpenMP ones:
// the candidate-grid sweep and the replication loop of the study driver.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "confglm/conformal.hpp"
#include "confglm/rng.hpp"
#include "confglm/simulation.hpp"
#include "confglm/special.hpp"

using namespace confglm;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

void bench_grid_sweep() {
  Rng rng(7);
  const int n = 4000;
  std::vector<double> ys(n);
  for (auto& v : ys) v = rng.normal();
  const double h = 0.2;

  std::vector<double> base(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) base[i] += normal_pdf((ys[i] - ys[j]) / h);

  auto accept = [&](double cand) {
    double score_cand = normal_pdf(0.0);
    for (double v : ys) score_cand += normal_pdf((v - cand) / h);
    long cnt = 1;
    for (int i = 0; i < n; ++i)
      if (base[i] + normal_pdf((ys[i] - cand) / h) <= score_cand) ++cnt;
    return cnt >= 400;
  };

  std::vector<double> grid;
  for (double v = -4.0; v <= 4.0; v += 0.002) grid.push_back(v);

  long warn_s = 0, warn_p = 0;
  double t0 = now_seconds();
  auto flags_s = acceptance_flags_serial(accept, grid, warn_s);
  double t1 = now_seconds();
  auto flags_p = acceptance_flags_parallel(accept, grid, warn_p);
  double t2 = now_seconds();

  const bool same = flags_s == flags_p;
  std::printf("grid sweep      %7zu candidates  serial %.3fs  parallel %.3fs"
              "  speedup %.2fx  identical %s\n",
              grid.size(), t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1),
              same ? "yes" : "NO");
}

void bench_study() {
  SimSetting setting = SimSetting::C(80);
  std::vector<Method> methods = {Method::trans, Method::bin};
  const int reps = 12;

  double t0 = now_seconds();
  StudyResult serial = run_study_serial(setting, methods, reps, 0.1, 42);
  double t1 = now_seconds();
  StudyOptions opts;
  StudyResult parallel = run_study(setting, methods, reps, 0.1, 42, opts);
  double t2 = now_seconds();

  bool same = true;
  for (Method m : methods)
    same = same && serial.reports[m].marginal_coverage ==
                       parallel.reports[m].marginal_coverage &&
           serial.reports[m].mean_area == parallel.reports[m].mean_area;
  std::printf("study driver    %7d replications serial %.3fs  parallel %.3fs"
              "  speedup %.2fx  identical %s\n",
              reps, t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1),
              same ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both paths run single-threaded\n");
#endif
  bench_grid_sweep();
  bench_study();
  return 0;
}
