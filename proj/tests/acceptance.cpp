/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pwfk Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Acceptance run. Prints one PASS/FAIL line per criterion, each followed by
// indented detail lines, and exits non-zero when any criterion fails.
//
//   acceptance [--report <file>] [criterion ...]     e.g.  acceptance 1 3 7

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pwfk/compounding.hpp"
#include "pwfk/dataset.hpp"
#include "pwfk/pipeline.hpp"
#include "pwfk/pwf.hpp"
#include "pwfk/verify.hpp"
#include "support.hpp"

using namespace pwfk;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

// ---- 1 ---------------------------------------------------------------------
Outcome adjoint_criterion() {
  const auto r = verify_adjoint(0);
  Outcome o;
  o.pass = r.passed && r.seconds < 5.0;
  o.summary = fmt("adjoint dot test, 10 seeds x {32,64,128}^2: full max %.2e, all 5 stages <= 1e-10: %s; %.2f s (limit 5 s)",
                  r.metrics.at("full").get<double>(), r.passed ? "yes" : "no", r.seconds);
  o.details = r.lines;
  return o;
}

// ---- 2 ---------------------------------------------------------------------
Outcome focus_criterion() {
  const auto r = verify_focus(0);
  Outcome o;
  o.pass = r.passed && r.seconds < 60.0;
  o.summary = fmt("focusing, 20 point phantoms at -16/0/+16 deg within max(2 px, lambda), 75-angle compound within 1 px: %s; %.1f s (limit 60 s)",
                  r.passed ? "yes" : "no", r.seconds);
  o.details = r.lines;
  return o;
}

// ---- 3 ---------------------------------------------------------------------
Outcome linearity_criterion() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst_h = 0, worst_a = 0;
  bool bitwise = true;
  for (double deg : {-16.0, 0.0, 9.5}) {
    AcquisitionConfig c;
    c.angle = deg_to_rad(deg);
    const FkOperator op(c);
    const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(1024, 64, [&] { return g(rng); });
    const Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(1024, 64, [&] { return g(rng); });
    const Eigen::MatrixXd ma = op.apply(a), mb = op.apply(b);
    for (double alpha : {-3.5, 1e-3, 42.0})
      worst_h = std::max(worst_h, test::rel_diff(op.apply(alpha * a), (alpha * ma).eval()));
    worst_a = std::max(worst_a, test::rel_diff(op.apply(a + b), (ma + mb).eval()));
    // repeated runs, also through a freshly built operator and a fresh simulation
    const FkOperator again(c);
    const Eigen::MatrixXd r1 = again.apply(a);
    bitwise = bitwise && std::memcmp(r1.data(), ma.data(), sizeof(double) * ma.size()) == 0;
    PhantomSpec ps;
    ps.seed = 77;
    const Eigen::MatrixXd s1 = migrate(op, simulate_rf(generate_phantom(ps), c)).pixels;
    const Eigen::MatrixXd s2 = migrate(again, simulate_rf(generate_phantom(ps), c)).pixels;
    bitwise = bitwise && std::memcmp(s1.data(), s2.data(), sizeof(double) * s1.size()) == 0;
  }
  o.pass = worst_h <= 1e-12 && worst_a <= 1e-12 && bitwise;
  o.summary = fmt("linearity: homogeneity %.2e, additivity %.2e (tol 1e-12); repeated runs bitwise identical: %s; %.1f s",
                  worst_h, worst_a, bitwise ? "yes" : "no", since(t0));
  return o;
}

// ---- 4 ---------------------------------------------------------------------
Outcome gradcheck_criterion() {
  const auto r = verify_gradcheck(0);
  Outcome o;
  o.pass = r.passed && r.seconds < 120.0;
  o.summary = fmt("grad_check 16x16 d2i (2+FK+2, 8 ch, WS + GN): params %.2e, input %.2e (tol 1e-4); %.1f s (limit 120 s)",
                  r.metrics.at("max_rel_error_params").get<double>(),
                  r.metrics.at("max_rel_error_input").get<double>(), r.seconds);
  o.details = r.lines;
  return o;
}

// ---- 5 ---------------------------------------------------------------------
Outcome compounding_criterion() {
  const auto t0 = Clock::now();
  const AcquisitionConfig base;
  const auto angles = angle_sequence(75, deg_to_rad(16.0));
  const CompoundMigrator mig(base, CompoundConfig{angles});
  const std::vector<std::size_t> ns = {1, 5, 15, 25, 75};
  std::map<std::size_t, std::vector<double>> table;
  for (std::uint64_t p = 0; p < 5; ++p) {
    PhantomSpec ps;
    ps.seed = 1000 + p;
    const Phantom ph = generate_phantom(ps);
    std::vector<Image> images;
    for (double a : angles) {
      const AcquisitionConfig c = base.with_angle(a);
      images.push_back(migrate(mig.operator_for(a), simulate_rf(ph, c)));
    }
    const Image ref = coherent_compound(images);
    const double peak = ref.pixels.cwiseAbs().maxCoeff();
    for (std::size_t n : ns) {
      std::vector<Image> sub;
      for (std::size_t k : symmetric_subset(75, n)) sub.push_back(images[k]);
      table[n].push_back(psnr((coherent_compound(sub).pixels / peak).eval(), (ref.pixels / peak).eval()));
    }
  }
  Outcome o;
  bool monotone = true;
  double prev = -1e300;
  std::string meds;
  for (std::size_t n : ns) {
    const double m = median(table[n]);
    monotone = monotone && m >= prev;
    prev = m;
    meds += fmt("%s n=%zu: %.2f dB", meds.empty() ? "" : ",", n, m);
    std::string row = fmt("n=%2zu per phantom:", n);
    for (double v : table[n]) row += fmt(" %.2f", v);
    o.details.push_back(row);
  }
  const double secs = since(t0);
  o.pass = monotone && secs < 120.0;
  o.summary = fmt("compounding convergence, median over 5 phantoms:%s; non-decreasing: %s; %.1f s (limit 120 s)",
                  meds.c_str(), monotone ? "yes" : "no", secs);
  return o;
}

// ---- 6 ---------------------------------------------------------------------
Outcome learning_criterion() {
  const auto t0 = Clock::now();
  const DatasetSpec ds = test::toy_dataset_spec(64, 8, 7);
  const CompoundMigrator mig(ds.acquisition, CompoundConfig{ds.angles}, ds.fk);
  const FkOperator op0(ds.acquisition, ds.fk);
  const std::size_t k0 = 37;  // the 0 deg frame
  std::vector<PreparedSample> train_set[2], test_set[2];
  for (std::size_t i = 0; i < ds.n_train + ds.n_test; ++i) {
    const Scenario sc = simulate_scenario(ds, i, mig);
    for (int v = 0; v < 2; ++v) {
      auto s = prepare_sample(i, sc.frames[k0], sc.ground_truth, v ? Variant::image_to_image : Variant::data_to_image, op0);
      (i < ds.n_train ? train_set[v] : test_set[v]).push_back(std::move(s));
    }
  }
  Outcome o;
  o.details.push_back(fmt("toy data: 64 train / 8 test, 64x64, 75 angles; generated in %.1f s", since(t0)));

  std::vector<double> d2i, i2i, fk, d2i_train, fk_train;
  std::vector<double> first_loss, last_loss;
  std::size_t loss_drop_votes = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (int v = 0; v < 2; ++v) {
      const auto t1 = Clock::now();
      NetworkSpec ns;
      ns.channels = 8;
      if (v == 0) {
        ns.variant = Variant::data_to_image;
        ns.pre_layers = ns.post_layers = 4;
        ns.acquisition = ds.acquisition;
      } else {
        ns.variant = Variant::image_to_image;
        ns.pre_layers = 0;
        ns.post_layers = 8;
      }
      auto net = build_network(ns, seed);
      TrainConfig tc;
      tc.epochs = 200;
      tc.lr = 0.01;
      tc.seed = seed;
      const TrainResult res = train(net, train_set[v], tc);
      const EvalReport rep = evaluate(net, test_set[v]);
      // mean loss of the first and of the last epoch
      double first = 0, last = 0;
      std::size_t nf = 0, nl = 0;
      for (const HistoryRow& h : res.history) {
        if (h.epoch == res.history.front().epoch) first += h.loss, ++nf;
        if (h.epoch == res.history.back().epoch) last += h.loss, ++nl;
      }
      first /= nf;
      last /= nl;
      if (v == 0) {
        d2i.push_back(rep.mean_psnr_db);
        fk.push_back(rep.mean_baseline_psnr_db);
        const EvalReport tr = evaluate(net, train_set[v]);
        d2i_train.push_back(tr.mean_psnr_db);
        fk_train.push_back(tr.mean_baseline_psnr_db);
        loss_drop_votes += last < first;
        first_loss.push_back(first);
        last_loss.push_back(last);
      } else {
        i2i.push_back(rep.mean_psnr_db);
      }
      o.details.push_back(fmt("seed %llu %s: test %.2f dB (plain FK %.2f dB), loss first/last epoch %.5f -> %.5f, %.0f s",
                              static_cast<unsigned long long>(seed), variant_name(ns.variant).c_str(),
                              rep.mean_psnr_db, rep.mean_baseline_psnr_db, first, last, since(t1)));
    }
  }
  const double md = median(d2i), mi = median(i2i), mf = median(fk);
  const double secs = since(t0);
  o.details.push_back(fmt("train split, median: d2i %.2f dB vs plain FK %.2f dB", median(d2i_train), median(fk_train)));
  o.details.push_back(fmt("d2i training loss lower at the end than at the start for %zu of 3 seeds", loss_drop_votes));
  const bool falling = median(last_loss) < median(first_loss);
  o.pass = md >= mi && md >= mf + 1.0 && falling;
  o.summary = fmt("learning trend, median of 3 seeds: d2i %.2f >= i2i %.2f dB: %s; d2i - plain FK = %+.2f dB (need >= +1): %s; "
                  "d2i loss %.5f -> %.5f falls: %s; %.0f s (target 1800 s)",
                  md, mi, md >= mi ? "yes" : "no", md - mf, md >= mf + 1.0 ? "yes" : "no", median(first_loss),
                  median(last_loss), falling ? "yes" : "no", secs);
  return o;
}

// ---- 7 ---------------------------------------------------------------------
Outcome format_criterion() {
  const auto t0 = Clock::now();
  test::TempDir tmp("acceptance7");
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 100);
  bool roundtrip = true;
  std::size_t arrays = 0;
  for (PwfDtype d : {PwfDtype::f32, PwfDtype::f64, PwfDtype::c32, PwfDtype::c64}) {
    for (const std::vector<std::uint64_t>& dims :
         {std::vector<std::uint64_t>{0}, {1}, {7, 3}, {2, 3, 5}, {1, 64, 64}}) {
      std::uint64_t n = 1;
      for (auto k : dims) n *= k;
      PwfArray a;
      if (pwf_dtype_is_complex(d)) {
        std::vector<std::complex<double>> v(n);
        for (auto& x : v) x = {g(rng), g(rng)};
        a = pwf_from_complex(dims, v, d);
      } else {
        std::vector<double> v(n);
        for (auto& x : v) x = g(rng);
        a = pwf_from_values(dims, v, d);
      }
      const fs::path p = tmp / ("a" + std::to_string(arrays++) + ".pwf");
      write_pwf(p, a);
      const PwfArray b = read_pwf(p);
      const auto bytes = test::read_bytes(p);
      const auto enc = encode_pwf(b);
      roundtrip = roundtrip && b == a && bytes.size() == enc.size() &&
                  std::memcmp(bytes.data(), enc.data(), enc.size()) == 0;
    }
  }
  // cmd_simulate twice with one seed, into the same path
  const nlohmann::json dsj = dataset_spec_to_json(test::toy_dataset_spec(0, 0, 0));
  write_json_file(tmp / "spec.json", {{"phantom", dsj.at("phantom")}, {"acquisition", dsj.at("acquisition")}});
  auto simulate = [&] {
    return test::run_cli({"simulate", "--spec", (tmp / "spec.json").string(), "--n", "4", "--angles", "9,16",
                          "--seed", "123", "--out", (tmp / "ds").string()});
  };
  const int c1 = simulate().code;
  const auto h1 = test::tree_hashes(tmp / "ds", false);
  fs::remove_all(tmp / "ds");
  const int c2 = simulate().code;
  const auto h2 = test::tree_hashes(tmp / "ds", false);
  const bool same = c1 == 0 && c2 == 0 && !h1.empty() && h1 == h2;
  Outcome o;
  o.pass = roundtrip && same;
  o.summary = fmt("PWF write/read bitwise over %zu arrays x 4 dtypes: %s; simulate --seed 123 twice: %zu files, hashes identical: %s; %.1f s",
                  arrays / 4, roundtrip ? "yes" : "no", h1.size(), same ? "yes" : "no", since(t0));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string report;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--report" && i + 1 < argc) {
      report = argv[++i];
    } else if (a.size() == 1 && a[0] >= '1' && a[0] <= '7') {
      selected.insert(a[0] - '0');
    } else {
      std::cerr << "usage: acceptance [--report <file>] [1-7 ...]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"adjoint", adjoint_criterion},       {"focus", focus_criterion},
      {"linearity", linearity_criterion},   {"gradcheck", gradcheck_criterion},
      {"compounding", compounding_criterion}, {"learning", learning_criterion},
      {"formats", format_criterion}};

  std::ostringstream log;
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("threw: ") + e.what();
    }
    all = all && o.pass;
    std::ostringstream block;
    block << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[k].first << "): " << o.summary
          << '\n';
    for (const auto& d : o.details) block << "        " << d << '\n';
    std::cout << block.str() << std::flush;
    log << block.str();
  }
  if (!report.empty()) std::ofstream(report) << log.str();
  return all ? 0 : 1;
}
