// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "sfd/attention.hpp"
#include "sfd/cada_vae.hpp"
#include "sfd/continual.hpp"
#include "sfd/freq.hpp"
#include "sfd/harness/experiment.hpp"
#include "sfd/harness/outputs.hpp"
#include "sfd/metrics.hpp"
#include "sfd/ops.hpp"
#include "sfd/translation.hpp"
#include "tiny.hpp"

namespace fs = std::filesystem;
using namespace sfd;
using continual::Method;

namespace {

// Pinned tolerances and budgets.
constexpr double kDctRoundTrip = 1e-5;
constexpr double kParseval = 1e-6;  // relative energy error
constexpr double kDctSeconds = 30.0;
constexpr int kDctPlanes = 200;
constexpr double kPartition = 1e-5;
constexpr double kDcEquivalence = 1e-6;
constexpr double kKlMonteCarlo = 1e-2;
constexpr std::size_t kKlSamples = 100000;
constexpr double kWasserstein = 1e-9;
constexpr double kGradient = 1e-3;
constexpr std::size_t kGradientParams = 1000;
constexpr double kGradientSeconds = 120.0;
constexpr int kMetricMatrices = 1000;
constexpr double kMetric = 1e-12;
constexpr int kNcmInstances = 100;
constexpr double kAccuracyMargin = 0.05;
constexpr double kEndToEndSeconds = 15.0 * 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd random_plane(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Tensor random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::vector<double> v(count);
  for (auto& x : v) x = n(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

Outcome dct_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  double round_trip = 0.0, parseval = 0.0;
  for (std::size_t n : {8u, 16u, 32u}) {
    for (int i = 0; i < kDctPlanes; ++i) {
      const auto x = random_plane(n, rng);
      const auto s = freq::dct2_forward(freq::ImagePlane(x));
      round_trip = std::max(round_trip, (freq::dct2_inverse(s).values() - x).cwiseAbs().maxCoeff());
      parseval = std::max(parseval, std::abs(s.coeffs().squaredNorm() - x.squaredNorm()) / x.squaredNorm());
    }
  }
  const double secs = seconds_since(t0);
  return {round_trip < kDctRoundTrip && parseval < kParseval && secs < kDctSeconds,
          fmt("round-trip %.2e, Parseval %.2e, %.2fs over 3x200 planes", round_trip, parseval, secs)};
}

Outcome frequency_partition() {
  std::mt19937_64 rng(2);
  double worst_spectrum = 0.0, worst_image = 0.0;
  for (std::size_t n : {8u, 16u, 32u}) {
    for (std::size_t cutoff = 0; cutoff <= 2 * (n - 1); ++cutoff) {
      const auto x = random_plane(n, rng);
      const auto s = freq::dct2_forward(freq::ImagePlane(x));
      const auto split = freq::split_spectrum(s, cutoff);
      worst_spectrum = std::max(worst_spectrum, (split.low.coeffs() + split.high.coeffs() - s.coeffs()).cwiseAbs().maxCoeff());
      const auto t = freq::reconstruct_triplet(freq::ImagePlane(x), cutoff);
      worst_image = std::max(worst_image, (t.low.values() + t.high.values() - x).cwiseAbs().maxCoeff());
    }
  }
  return {worst_spectrum < kPartition && worst_image < kPartition,
          fmt("spectrum %.2e, reconstruction %.2e over every cutoff of N=8,16,32", worst_spectrum, worst_image)};
}

Outcome dc_equivalence() {
  Rng rng(3);
  double worst_squeeze = 0.0, worst_gate = 0.0;
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {5, 3}, {8, 8}, {1, 1}}) {
    const auto se = attention::SEGateParams::make(8, 4, rng);
    attention::FcaGateParams fca{{{0, 0}}, se.clone()};
    const double factor = attention::dc_squeeze_factor(h, w);
    const auto x = random_tensor({3, 8, h, w}, 4 + h * w);
    const auto squeeze = attention::fca_squeeze(x, fca);
    const auto gap = ops::global_avg_pool(x);
    for (std::size_t i = 0; i < gap.numel(); ++i)
      worst_squeeze = std::max(worst_squeeze, std::abs(squeeze.data()[i] - factor * gap.data()[i]));
    for (auto& v : fca.excitation.reduce.mutable_data()) v /= factor;
    const auto a = attention::fca_gate(x, fca);
    const auto b = attention::se_gate(x, se);
    for (std::size_t i = 0; i < a.numel(); ++i) worst_gate = std::max(worst_gate, std::abs(a.data()[i] - b.data()[i]));
  }
  return {worst_squeeze < kDcEquivalence && worst_gate < kDcEquivalence,
          fmt("squeeze vs sqrt(HW)*GAP %.2e, gate vs SE %.2e", worst_squeeze, worst_gate)};
}

cada::GaussianLatent latent(std::vector<double> mu, std::vector<double> sigma) {
  const std::size_t d = mu.size();
  return {Tensor::from({1, d}, std::move(mu)), Tensor::from({1, d}, std::move(sigma))};
}

Outcome closed_forms() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mu_dist(-1.0, 1.0), sigma_dist(0.5, 1.5);
  double kl_err = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> mu(4), sigma(4);
    for (auto& m : mu) m = mu_dist(rng);
    for (auto& s : sigma) s = sigma_dist(rng);
    const double closed = cada::kl_divergence(latent(mu, sigma)).item();
    kl_err = std::max(kl_err, std::abs(closed - oracle::kl_monte_carlo(mu, sigma, kKlSamples, rng)));
  }
  const double w_shift = cada::wasserstein(latent({1.0, 0.0}, {1.0, 1.0}), latent({0.0, 0.0}, {1.0, 1.0})).item();
  const double w_scale = cada::wasserstein(latent({0.5, 0.5}, {2.0, 2.0}), latent({0.5, 0.5}, {1.0, 1.0})).item();
  bool symmetric = true, non_negative = true;
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> ma(3), sa(3), mb(3), sb(3);
    for (std::size_t d = 0; d < 3; ++d) {
      ma[d] = u(rng) - 1.0;
      mb[d] = u(rng) - 1.0;
      sa[d] = u(rng);
      sb[d] = u(rng);
    }
    const double ab = cada::wasserstein(latent(ma, sa), latent(mb, sb)).item();
    const double ba = cada::wasserstein(latent(mb, sb), latent(ma, sa)).item();
    symmetric = symmetric && std::abs(ab - ba) < kWasserstein;
    non_negative = non_negative && ab >= 0.0;
  }
  const double e1 = std::abs(w_shift - 1.0), e2 = std::abs(w_scale - std::sqrt(2.0));
  return {kl_err < kKlMonteCarlo && e1 < kWasserstein && e2 < kWasserstein && symmetric && non_negative,
          fmt("KL vs MC %.2e, W mean-shift err %.2e, W scale err %.2e", kl_err, e1, e2) +
              (symmetric ? ", symmetric" : ", NOT symmetric") + (non_negative ? ", non-negative" : ", NEGATIVE")};
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    std::string name;
    NamedTensors params;
    std::function<Tensor()> loss;
  };
  std::vector<Case> cases;

  cada::CadaConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden_dim = 4;
  cfg.alpha = 0.7;
  cfg.beta = 0.3;
  Rng init(6);
  auto codecs = std::make_shared<std::vector<cada::ModalityCodec>>(
      std::vector<cada::ModalityCodec>{cada::ModalityCodec::make(0, 4, cfg, init), cada::ModalityCodec::make(1, 4, cfg, init)});
  const auto x1 = random_tensor({3, 4}, 7), x2 = random_tensor({3, 4}, 8);
  const auto n1 = random_tensor({3, 3}, 9), n2 = random_tensor({3, 3}, 10);
  NamedTensors cada_params{{"x1", x1}, {"x2", x2}};
  append_prefixed(cada_params, "c0", (*codecs)[0].parameters());
  append_prefixed(cada_params, "c1", (*codecs)[1].parameters());
  auto vae = [=] {
    const Tensor in[] = {x1, x2}, noise[] = {n1, n2};
    return cada::vae_loss(in, *codecs, noise, cfg);
  };
  auto ca = [=] {
    const Tensor in[] = {x1, x2};
    return cada::cross_alignment_loss(in, *codecs);
  };
  auto da = [=] {
    const cada::GaussianLatent ls[] = {cada::encode(x1, (*codecs)[0]), cada::encode(x2, (*codecs)[1])};
    return cada::distribution_alignment_loss(ls);
  };
  auto cada_total = [=] { return cada::cada_total_loss(vae(), ca(), da(), cfg); };
  cases.push_back({"vae", cada_params, vae});
  cases.push_back({"cross-alignment", cada_params, ca});
  cases.push_back({"distribution-alignment", cada_params, da});
  cases.push_back({"cada-total", cada_params, cada_total});

  Rng trng(11);
  auto t_old = translation::Translator::make(4, translation::TranslatorRole::old_model, trng);
  auto t_cur = translation::Translator::make(4, translation::TranslatorRole::current_model, trng);
  std::mt19937_64 g(12);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto* t : {&t_old, &t_cur}) {
    for (auto& v : t->output.weight.mutable_data()) v = n(g);
    for (auto& v : t->output.bias.mutable_data()) v = n(g);
  }
  const auto z_old = random_tensor({5, 4}, 13), z_cur = random_tensor({5, 4}, 14);
  NamedTensors trans_params;
  append_prefixed(trans_params, "old", t_old.parameters());
  append_prefixed(trans_params, "cur", t_cur.parameters());
  auto compensation = [=] {
    return translation::compensation_loss({translation::translate(z_old, t_old), translation::translate(z_cur, t_cur)});
  };
  cases.push_back({"compensation", trans_params, compensation});
  NamedTensors overall = cada_params;
  append_prefixed(overall, "t", trans_params);
  cases.push_back({"overall", overall, [=] { return continual::total_loss(cada_total(), compensation()); }});

  const auto zc = random_tensor({4, 3}, 15), zp = random_tensor({4, 3}, 16);
  cases.push_back({"lwf", {{"z", zc}}, [=] { return continual::lwf_loss(zc, zp); }});

  const auto w = random_tensor({3, 3}, 17), b = random_tensor({1, 5}, 18);
  const NamedTensors reg_params{{"w", w}, {"b", b}};
  const auto previous = clone_all(reg_params);
  continual::ImportanceMap fisher{continual::ImportanceKind::fisher, {}}, omega{continual::ImportanceKind::mas, {}};
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (auto* m : {&fisher, &omega})
    for (const auto& [name, t] : reg_params) {
      auto v = Tensor::zeros(t.shape());
      for (auto& x : v.mutable_data()) x = u(g);
      m->values.emplace_back(name, v);
    }
  for (const auto& [name, t] : reg_params)
    for (auto& v : Tensor(t).mutable_data()) v += u(g) - 1.0;
  cases.push_back({"ewc", reg_params, [=] { return continual::ewc_loss(reg_params, previous, fisher); }});
  cases.push_back({"mas", reg_params, [=] { return continual::mas_loss(reg_params, previous, omega); }});

  const auto a = random_tensor({6, 4}, 19), p = random_tensor({6, 4}, 20), neg = random_tensor({6, 4}, 21);
  auto triplet = [=] { return continual::triplet_loss(a, p, neg, 10.0); };
  cases.push_back({"triplet", {{"a", a}, {"p", p}, {"n", neg}}, triplet});
  NamedTensors combo_params{{"a", a}, {"p", p}, {"n", neg}};
  append_prefixed(combo_params, "r", reg_params);
  const continual::MethodConfig ewc_method{Method::EWC, 0.5};
  cases.push_back({"metric+regularizer", combo_params, [=] {
                     return continual::combined_loss(triplet(), continual::ewc_loss(reg_params, previous, fisher),
                                                     ewc_method);
                   }});

  double worst = 0.0;
  std::string worst_name, failures;
  std::size_t largest = 0;
  bool ok = true;
  for (const auto& c : cases) {
    const std::size_t count = parameter_count(c.params);
    largest = std::max(largest, count);
    const auto r = check::check_gradients(c.params, c.loss);
    if (r.max_relative_error > worst) {
      worst = r.max_relative_error;
      worst_name = c.name;
    }
    if (!(r.max_relative_error < kGradient) || count > kGradientParams) {
      ok = false;
      failures += " " + c.name;
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kGradientSeconds;
  return {ok, fmt("%.0f losses, worst relative error %.2e", static_cast<double>(cases.size()), worst) + " (" +
                  worst_name + ")" + fmt(", <= %.0f params, %.2fs", static_cast<double>(largest), secs) +
                  (failures.empty() ? "" : ", failing:" + failures)};
}

Outcome metric_equivalence() {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < kMetricMatrices; ++trial) {
    oracle::Table t(size(rng));
    metrics::AccuracyMatrix m(t.size());
    for (std::size_t k = 1; k <= t.size(); ++k)
      for (std::size_t j = 1; j <= k; ++j) {
        t[k - 1].push_back(u(rng));
        m.set(k, j, t[k - 1].back());
      }
    for (std::size_t k = 1; k <= t.size(); ++k) {
      worst = std::max(worst, std::abs(metrics::avg_incremental_accuracy(m, k) - oracle::avg_accuracy(t, k)));
      if (k >= 2) worst = std::max(worst, std::abs(metrics::avg_forgetting(m, k) - oracle::avg_forgetting(t, k)));
    }
  }
  metrics::AccuracyMatrix hand(2);
  hand.set(1, 1, 0.9);
  hand.set(2, 1, 0.8);
  hand.set(2, 2, 0.7);
  const double f2 = metrics::avg_forgetting(hand, 2);
  const bool exact = f2 == 0.9 - 0.8;
  return {worst < kMetric && exact, fmt("max deviation %.2e over 1000 matrices, F_2 = %.17g", worst, f2) +
                                        (exact ? " (exact)" : " (NOT exact)")};
}

Outcome ncm_equivalence() {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 12);
  std::size_t mismatches = 0, queries_total = 0;
  for (int trial = 0; trial < kNcmInstances; ++trial) {
    const int classes = count(rng);
    const std::size_t dim = 5;
    translation::PrototypeMemory memory;
    std::vector<std::vector<double>> rows;
    std::vector<int> ids;
    for (int c = 0; c < classes; ++c) {
      Eigen::VectorXd p(dim);
      std::vector<double> row(dim);
      for (std::size_t d = 0; d < dim; ++d) row[d] = p(static_cast<Eigen::Index>(d)) = n(rng);
      memory.set(c * 3 + 1, p, 0);
      rows.push_back(row);
      ids.push_back(c * 3 + 1);
    }
    Eigen::MatrixXd queries(20, dim);
    for (Eigen::Index i = 0; i < queries.size(); ++i) queries.data()[i] = n(rng);
    const auto predicted = translation::ncm_classify(queries, memory);
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      std::vector<double> query(dim);
      for (std::size_t d = 0; d < dim; ++d) query[d] = queries(q, static_cast<Eigen::Index>(d));
      mismatches += predicted[static_cast<std::size_t>(q)] != ids[oracle::nearest(rows, query)];
      ++queries_total;
    }
  }
  return {mismatches == 0, fmt("%.0f mismatches in %.0f queries over 100 instances", static_cast<double>(mismatches),
                               static_cast<double>(queries_total))};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

harness::ExperimentConfig all_methods_config() {
  auto config = check::tiny_config();
  config.methods = {Method::FT, Method::LWF, Method::EWC, Method::MAS, Method::SDC, Method::SFDNet, Method::E_SFDNet};
  config.seeds = {0, 1};
  return config;
}

struct EndToEnd {
  harness::ExperimentResult result;
  double seconds = 0.0;
};

Outcome exemplar_free(const harness::ExperimentResult& tiny, const harness::ExperimentResult& benchmark) {
  std::size_t violations = 0, runs = 0, failed = 0;
  for (const auto* r : {&tiny, &benchmark})
    for (const auto& run : r->runs) {
      ++runs;
      failed += !run.ok();
      violations += run.audit_violations;
    }
  return {violations == 0 && failed == 0,
          fmt("%.0f old-task train reads after completion across %.0f runs (all 7 methods), %.0f failed runs",
              static_cast<double>(violations), static_cast<double>(runs), static_cast<double>(failed))};
}

Outcome end_to_end(const EndToEnd& e) {
  double a_ft = 0.0, a_sfd = 0.0, f_ft = 0.0, f_sfd = 0.0;
  std::size_t n_ft = 0, n_sfd = 0;
  for (const auto& run : e.result.runs) {
    if (!run.ok()) return {false, "run " + continual::to_string(run.method) + " failed: " + run.error};
    if (run.method == Method::FT) {
      a_ft += run.avg_accuracy.back();
      f_ft += run.avg_forgetting.back();
      ++n_ft;
    } else {
      a_sfd += run.avg_accuracy.back();
      f_sfd += run.avg_forgetting.back();
      ++n_sfd;
    }
  }
  a_ft /= static_cast<double>(n_ft);
  f_ft /= static_cast<double>(n_ft);
  a_sfd /= static_cast<double>(n_sfd);
  f_sfd /= static_cast<double>(n_sfd);
  const bool ok = a_sfd - a_ft >= kAccuracyMargin && f_sfd < f_ft && e.seconds < kEndToEndSeconds;
  return {ok, fmt("A_5 SFDNet %.4f vs FT %.4f, F_5 SFDNet %.4f vs FT %.4f", a_sfd, a_ft, f_sfd, f_ft) +
                  fmt(", 3 seeds, %.1fs", e.seconds)};
}

Outcome determinism(const harness::ExperimentResult& first, const fs::path& out) {
  const auto config = all_methods_config();
  const auto second = harness::run_experiment(config);
  harness::emit_experiment(first, out / "determinism_a");
  harness::emit_experiment(second, out / "determinism_b");
  std::size_t compared = 0, differing = 0;
  for (const auto& run : first.runs) {
    const auto rel = fs::path(continual::to_string(run.method)) / ("seed" + std::to_string(run.seed)) / "accuracy_matrix.csv";
    const auto a = read_file(out / "determinism_a" / rel), b = read_file(out / "determinism_b" / rel);
    ++compared;
    differing += a.empty() || a != b;
  }
  return {differing == 0, fmt("%.0f of %.0f matrix files differ byte-wise between two runs", static_cast<double>(differing),
                              static_cast<double>(compared))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  fs::path out = "acceptance_runs";
  app.add_option("--out", out, "Directory for experiment outputs");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  int failures = 0;
  auto report = [&](const char* name, const Outcome& o) {
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };

  report("dct-correctness", dct_correctness());
  report("frequency-partition", frequency_partition());
  report("fca-se-dc-equivalence", dc_equivalence());
  report("closed-form-oracles", closed_forms());
  report("gradient-suite", gradient_suite());
  report("metric-equivalence", metric_equivalence());
  report("ncm-equivalence", ncm_equivalence());

  const auto tiny = harness::run_experiment(all_methods_config());

  EndToEnd e2e;
  harness::ExperimentConfig benchmark;
  benchmark.methods = {Method::FT, Method::SFDNet};
  benchmark.seeds = {0, 1, 2};
  const auto t0 = std::chrono::steady_clock::now();
  e2e.result = harness::run_experiment(benchmark);
  e2e.seconds = seconds_since(t0);
  harness::emit_experiment(e2e.result, out / "end_to_end");

  report("exemplar-free-audit", exemplar_free(tiny, e2e.result));
  report("end-to-end-trend", end_to_end(e2e));
  report("determinism", determinism(tiny, out));

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
