// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "xmodal/xmodal.hpp"

using namespace xmodal;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix uniform_scores(std::size_t n, Rng& rng) {
  Matrix m(n, n);
  for (double& x : m.values()) x = rng.uniform(-1.0, 1.0);
  return m;
}

// ---------------------------------------------------------------- 1

Outcome gradient_suite() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (LossKind kind : {LossKind::triplet, LossKind::avg_poly, LossKind::max_poly}) {
    GradCheckConfig cfg;
    cfg.loss.kind = kind;
    cfg.trials = 100;
    cfg.seed = 3;
    const GradCheckReport r = run_grad_check(cfg);
    pass = pass && r.passed() && r.loss_max_rel_err <= 1e-5 && r.encoder_max_rel_err <= 1e-4;
    detail += fmt("%s loss=%.2e enc=%.2e; ", std::string(to_string(kind)).c_str(), r.loss_max_rel_err,
                  r.encoder_max_rel_err);
  }
  const double t = seconds_since(start);
  pass = pass && t < 30.0;
  return {pass, detail + fmt("%.2fs (limit 30s)", t)};
}

// ---------------------------------------------------------------- 2

Outcome mining_oracle() {
  const auto start = Clock::now();
  Rng rng(2024);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    const Matrix s = uniform_scores(n, rng);
    const double lambda = rng.uniform(0.0, 0.5);
    const MiningMask mask = mine(s, lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const bool row = i != j && s(i, j) > s(i, i) - lambda;
        const bool col = i != j && s(i, j) > s(j, j) - lambda;
        if (mask.row(i, j) != row || mask.col(i, j) != col) ++mismatches;
      }
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 5.0, fmt("1000 batches, %zu mismatches, %.3fs (limit 5s)", mismatches, t)};
}

// ---------------------------------------------------------------- 3

Outcome triplet_degeneracy() {
  Rng rng(33);
  double worst_value = 0.0;
  double worst_grad = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    const Matrix s = uniform_scores(n, rng);
    const double margin = rng.uniform(0.0, 0.5);
    LossSpec spec;
    spec.kind = LossKind::max_poly;
    spec.coefficients.pos = {margin, -1.0};
    spec.coefficients.neg = {0.0, 1.0};
    spec.mining_enabled = false;
    const LossResult poly = compute_loss(s, spec);
    const LossResult trip = triplet_forward_backward(s, margin);
    worst_value = std::max(worst_value, std::abs(poly.value - trip.value));
    worst_grad = std::max(worst_grad, max_abs_diff(poly.grad_scores, trip.grad_scores));
  }
  return {worst_value <= 1e-12 && worst_grad <= 1e-12,
          fmt("100 batches, max |dvalue|=%.1e, max |dgrad|=%.1e", worst_value, worst_grad)};
}

// ---------------------------------------------------------------- 4

Outcome worked_example() {
  // Row direction: anchor 0 mines t1 (0.75 > 0.6), f(0.8)=0.068, g(0.75)=0.48.
  // Column direction: anchor 1 mines v0 (0.75 > 0.4), f(0.6)=0.152, g(0.75)=0.48.
  // (0.548 + 0.632) / 2 = 0.59.
  const double expected = (0.5 - 0.7 * 0.8 + 0.2 * 0.64 + 0.03 - 0.3 * 0.75 + 1.2 * 0.5625) / 2.0 +
                          (0.5 - 0.7 * 0.6 + 0.2 * 0.36 + 0.03 - 0.3 * 0.75 + 1.2 * 0.5625) / 2.0;
  const Matrix s{{0.8, 0.75}, {0.3, 0.6}};
  LossSpec spec;
  spec.coefficients = PolyCoefficients::mscoco();
  spec.kind = LossKind::avg_poly;
  const double avg = compute_loss(s, spec).value;
  spec.kind = LossKind::max_poly;
  const double mx = compute_loss(s, spec).value;
  const bool pass = std::abs(expected - 0.59) <= 1e-12 && std::abs(avg - 0.59) <= 1e-12 &&
                    std::abs(mx - 0.59) <= 1e-12;
  return {pass, fmt("avg_poly=%.15f max_poly=%.15f", avg, mx)};
}

// ---------------------------------------------------------------- 5-7, 9

constexpr int kSeeds = 5;

struct Run {
  std::vector<EpochRecord> log;
  std::vector<std::string> lines;
};

Run train_run(const FeaturePairSet& data, LossKind kind, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.loss.kind = kind;
  cfg.seed = seed;
  Run run;
  run.log = train(data, cfg, [&](const EpochRecord& rec) { run.lines.push_back(to_json_line(rec)); }).log;
  return run;
}

double r1(const EpochRecord& rec, bool i2t) {
  return (i2t ? rec.val->image_to_text : rec.val->text_to_image).at(1);
}

// First epoch (1-based) with R@1 >= threshold in both directions, or epochs + 1.
std::size_t first_epoch_reaching(const Run& run, double threshold) {
  for (const auto& rec : run.log)
    if (r1(rec, true) >= threshold && r1(rec, false) >= threshold) return rec.epoch;
  return run.log.size() + 1;
}

struct Runs {
  std::vector<Run> max_poly, avg_poly, triplet;
  double max_poly_seconds = 0.0;
};

Outcome synthetic_convergence(const Runs& runs) {
  std::vector<double> i2t, t2i;
  for (const Run& r : runs.max_poly) {
    i2t.push_back(r1(r.log.back(), true));
    t2i.push_back(r1(r.log.back(), false));
  }
  const double mi = median(i2t), mt = median(t2i);
  std::string per_seed;
  for (int s = 0; s < kSeeds; ++s) per_seed += fmt(" %.1f/%.1f", i2t[s], t2i[s]);
  const bool pass = mi >= 90.0 && mt >= 90.0 && runs.max_poly_seconds < 120.0;
  return {pass, fmt("median val R@1 i2t=%.1f t2i=%.1f (seeds:%s), 5 runs in %.1fs", mi, mt, per_seed.c_str(),
                    runs.max_poly_seconds)};
}

Outcome faster_than_triplet(const Runs& runs, const std::string& curves_path) {
  int wins = 0;
  std::string per_seed;
  for (int s = 0; s < kSeeds; ++s) {
    const std::size_t em = first_epoch_reaching(runs.max_poly[s], 80.0);
    const std::size_t et = first_epoch_reaching(runs.triplet[s], 80.0);
    if (em <= et + 1) ++wins;
    per_seed += fmt(" %zu/%zu", em, et);
  }
  std::ofstream curves(curves_path, std::ios::trunc);
  for (int s = 0; s < kSeeds; ++s) {
    for (const auto* set : {&runs.max_poly, &runs.triplet, &runs.avg_poly}) {
      const char* name = set == &runs.max_poly ? "max_poly" : set == &runs.triplet ? "triplet" : "avg_poly";
      for (const auto& line : (*set)[s].lines)
        curves << "{\"loss\":\"" << name << "\",\"seed\":" << s + 1 << ',' << line.substr(1) << '\n';
    }
  }
  return {wins >= 3, fmt("max_poly epoch <= triplet epoch + 1 in %d/5 seeds (epochs to 80%% max/triplet:%s); "
                         "curves in %s",
                         wins, per_seed.c_str(), curves_path.c_str())};
}

Outcome avg_vs_max(const Runs& runs) {
  int ok = 0;
  std::string per_seed;
  std::vector<double> avg_i2t, avg_t2i, max_i2t, max_t2i;
  for (int s = 0; s < kSeeds; ++s) {
    const EpochRecord& a = runs.avg_poly[s].log.front();
    const EpochRecord& m = runs.max_poly[s].log.front();
    if (r1(a, true) >= r1(m, true) - 2.0 && r1(a, false) >= r1(m, false) - 2.0) ++ok;
    per_seed += fmt(" %.1f/%.1f", 0.5 * (r1(a, true) + r1(a, false)), 0.5 * (r1(m, true) + r1(m, false)));
    avg_i2t.push_back(r1(runs.avg_poly[s].log.back(), true));
    avg_t2i.push_back(r1(runs.avg_poly[s].log.back(), false));
    max_i2t.push_back(r1(runs.max_poly[s].log.back(), true));
    max_t2i.push_back(r1(runs.max_poly[s].log.back(), false));
  }
  const double di = std::abs(median(avg_i2t) - median(max_i2t));
  const double dt = std::abs(median(avg_t2i) - median(max_t2i));
  return {ok >= 3 && di <= 5.0 && dt <= 5.0,
          fmt("epoch-1 condition in %d/5 seeds (mean R@1 avg/max:%s); final median gap i2t=%.1f t2i=%.1f", ok,
              per_seed.c_str(), di, dt)};
}

Outcome determinism(const FeaturePairSet& data, const Runs& runs) {
  const Run again = train_run(data, LossKind::max_poly, 1);
  const bool same = again.lines == runs.max_poly[0].lines;
  return {same, fmt("seed 1 rerun: %zu log lines %s", again.lines.size(), same ? "identical" : "differ")};
}

// ---------------------------------------------------------------- 8

// Independent check of the weight rule on a 10,000-point grid, by power sums.
double worst_violation(const std::vector<double>& a, const std::vector<double>& b, double lo, double hi) {
  double worst = -1e300;
  for (int k = 0; k < 10000; ++k) {
    const double s = lo + (hi - lo) * k / 9999.0;
    double fp = 0.0, gpp = 0.0, fpp = 0.0;
    for (std::size_t p = 1; p < a.size(); ++p) fp += p * a[p] * std::pow(s, double(p - 1));
    for (std::size_t p = 2; p < a.size(); ++p) fpp += p * (p - 1) * a[p] * std::pow(s, double(p - 2));
    for (std::size_t q = 2; q < b.size(); ++q) gpp += q * (q - 1) * b[q] * std::pow(s, double(q - 2));
    worst = std::max({worst, fp, -fpp, -gpp});
  }
  return worst;
}

Outcome validator() {
  int published_ok = 0;
  for (const auto& c : {PolyCoefficients::mscoco(), PolyCoefficients::flickr30k(), PolyCoefficients::activitynet(),
                        PolyCoefficients::msrvtt()})
    if (validate_coefficients(c).ok()) ++published_ok;

  Rng rng(88);
  int generated = 0, rejected = 0;
  while (generated < 100) {
    PolyCoefficients c;
    c.pos.resize(2 + rng.below(3));
    c.neg.resize(2 + rng.below(3));
    for (double& x : c.pos) x = rng.uniform(-2.0, 2.0);
    for (double& x : c.neg) x = rng.uniform(-2.0, 2.0);
    if (worst_violation(c.pos, c.neg, c.domain.lo, c.domain.hi) < 1e-3) continue;
    ++generated;
    if (!validate_coefficients(c).ok()) ++rejected;
  }
  return {published_ok == 4 && rejected == 100,
          fmt("published sets accepted %d/4, violating sets rejected %d/100", published_ok, rejected)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string curves_path = argc > 1 ? argv[1] : "acceptance_curves.jsonl";

  report(1, "gradient suite", gradient_suite());
  report(2, "mining oracle", mining_oracle());
  report(3, "triplet degeneracy", triplet_degeneracy());
  report(4, "worked example", worked_example());

  const FeaturePairSet data = generate_synthetic(SyntheticSpec{});
  Runs runs;
  const auto start = Clock::now();
  for (int s = 1; s <= kSeeds; ++s) runs.max_poly.push_back(train_run(data, LossKind::max_poly, s));
  runs.max_poly_seconds = seconds_since(start);
  for (int s = 1; s <= kSeeds; ++s) {
    runs.triplet.push_back(train_run(data, LossKind::triplet, s));
    runs.avg_poly.push_back(train_run(data, LossKind::avg_poly, s));
  }
  report(5, "synthetic convergence", synthetic_convergence(runs));
  report(6, "faster than triplet", faster_than_triplet(runs, curves_path));
  report(7, "avg vs max", avg_vs_max(runs));
  report(8, "monotonicity validator", validator());
  report(9, "determinism", determinism(data, runs));

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
