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


#include "pwfk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>

#include "pwfk/checkpoint.hpp"
#include "pwfk/compounding.hpp"
#include "pwfk/errors.hpp"
#include "pwfk/pipeline.hpp"
#include "pwfk/verify.hpp"

namespace pwfk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

class Log {
 public:
  Log(std::ostream& out, bool json_lines) : out_(out), json_(json_lines) {}

  void event(const std::string& name, const json& fields = json::object()) const {
    if (json_) {
      json j = {{"event", name}};
      for (const auto& f : fields.items()) j[f.key()] = f.value();
      out_ << j.dump() << '\n';
      return;
    }
    out_ << name;
    for (const auto& f : fields.items())
      out_ << ' ' << f.key() << '=' << (f.value().is_string() ? f.value().get<std::string>() : f.value().dump());
    out_ << '\n';
  }
  void text(const std::string& line) const {
    if (json_)
      out_ << json{{"event", "message"}, {"text", line}}.dump() << '\n';
    else
      out_ << line << '\n';
  }

 private:
  std::ostream& out_;
  bool json_;
};

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " '" + p.string() + "' does not exist");
}

void require_parent_dir(const fs::path& p) {
  const fs::path parent = fs::absolute(p).parent_path();
  if (!fs::is_directory(parent))
    throw IoError("output directory '" + parent.string() + "' does not exist");
}

// Fresh or empty output directory.
void require_empty_or_absent(const fs::path& dir) {
  if (!fs::exists(dir)) {
    require_parent_dir(dir);
    return;
  }
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' exists and is not a directory");
  if (!fs::is_empty(dir))
    throw std::invalid_argument("output directory '" + dir.string() + "' is not empty");
}

fs::path sidecar_config_path(const fs::path& out_file) {
  fs::path p = out_file;
  p.replace_extension(".run_config.json");
  return p;
}

json run_config(const std::string& command, json flags) {
  return {{"command", command}, {"version", kVersion}, {"flags", std::move(flags)}};
}

}  // namespace

std::pair<std::size_t, double> parse_angles(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("--angles expects <count>,<half_span_deg>, got '" + text + "'");
  std::size_t n = 0;
  double half = 0.0;
  try {
    std::size_t used = 0;
    const long long count = std::stoll(text.substr(0, comma), &used);
    if (used != comma || count < 1) throw std::invalid_argument("count");
    n = static_cast<std::size_t>(count);
    const std::string rest = text.substr(comma + 1);
    half = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("span");
  } catch (const std::exception&) {
    throw std::invalid_argument("--angles expects <count>,<half_span_deg>, got '" + text + "'");
  }
  if (!(half >= 0.0) || half >= 90.0)
    throw std::invalid_argument("--angles: half span must lie in [0, 90) degrees");
  if (n > 1 && half == 0.0) throw std::invalid_argument("--angles: several angles need a nonzero span");
  return {n, half};
}

DatasetSpec simulate_spec(const json& file, std::size_t n, std::size_t n_angles, double half_span_deg,
                          std::uint64_t seed) {
  static const std::set<std::string> allowed = {"phantom", "acquisition", "frame_dtype", "fk", "n_test"};
  if (!file.is_object()) throw std::invalid_argument("--spec: expected a JSON object");
  for (const auto& item : file.items())
    if (!allowed.contains(item.key()))
      throw std::invalid_argument("--spec: unknown or flag-controlled field '" + item.key() + "'");
  if (n == 0) throw std::invalid_argument("--n must be at least 1");
  json j = file;
  j.erase("n_test");
  DatasetSpec spec = dataset_spec_from_json(j);
  spec.angles = angle_sequence(n_angles, deg_to_rad(half_span_deg));
  spec.master_seed = seed;
  spec.n_test = file.contains("n_test") ? file.at("n_test").get<std::size_t>()
                                        : static_cast<std::size_t>(std::llround(static_cast<double>(n) / 15.0));
  if (spec.n_test > n) throw std::invalid_argument("--spec: n_test exceeds --n");
  spec.n_train = n - spec.n_test;
  return spec;
}

namespace {

int cmd_simulate(const Log& log, const std::string& spec_path, std::size_t n, const std::string& angles,
                 const fs::path& out, std::uint64_t seed) {
  json file = json::object();
  if (!spec_path.empty()) {
    require_file(spec_path, "spec");
    file = read_json_file(spec_path);
  }
  const auto [n_angles, half] = parse_angles(angles);
  const DatasetSpec spec = simulate_spec(file, n, n_angles, half, seed);
  require_empty_or_absent(out);
  log.event("simulate_start", {{"scenarios", n}, {"angles", n_angles}, {"out", out.string()}});
  const auto manifest = make_dataset(n, spec, out);
  write_json_file(out / "run_config.json",
                  run_config("simulate", {{"spec", spec_path},
                                          {"n", n},
                                          {"angles", angles},
                                          {"seed", seed},
                                          {"dataset_spec", dataset_spec_to_json(spec)}}));
  log.event("simulate_done", {{"train", spec.n_train}, {"test", spec.n_test},
                              {"manifest", (out / "manifest.json").string()}});
  return kExitOk;
}

int cmd_migrate(const Log& log, const fs::path& in, const std::string& config, const fs::path& out) {
  require_file(in, "frame");
  if (!config.empty()) require_file(config, "config");
  require_parent_dir(out);
  const RFFrame frame = config.empty() ? read_frame(in)
                                       : read_frame(in, read_json_file(config).get<AcquisitionConfig>());
  const FkOperator op = build_operator(frame.config);
  write_image(out, migrate(op, frame));
  write_json_file(sidecar_config_path(out),
                  run_config("migrate", {{"in", in.string()}, {"config", config}, {"out", out.string()},
                                         {"acquisition", frame.config}}));
  log.event("migrate_done", {{"rows", op.n_z()}, {"cols", op.n_x()}, {"out", out.string()}});
  return kExitOk;
}

int cmd_compound(const Log& log, const fs::path& in, const fs::path& out) {
  if (!fs::is_directory(in)) throw IoError("frame directory '" + in.string() + "' does not exist");
  require_parent_dir(out);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.starts_with("frame_") && e.path().extension() == ".pwf")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no frame_*.pwf files in '" + in.string() + "'");
  std::vector<RFFrame> frames;
  for (const auto& f : files) frames.push_back(read_frame(f));
  write_image(out, compound_migrate(frames));
  write_json_file(sidecar_config_path(out),
                  run_config("compound", {{"in", in.string()}, {"out", out.string()}, {"frames", files.size()}}));
  log.event("compound_done", {{"frames", files.size()}, {"out", out.string()}});
  return kExitOk;
}

struct TrainFlags {
  fs::path dataset;
  std::string variant = "d2i";
  double lr = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  fs::path out;
  std::size_t channels = 64;
  std::size_t layers = 8;
  std::size_t groups = 8;
  std::size_t eval_interval = 0;
};

int cmd_train(const Log& log, const TrainFlags& f) {
  require_file(f.dataset, "dataset manifest");
  require_empty_or_absent(f.out);
  const Variant variant = variant_from_name(f.variant);
  const auto manifest = read_manifest(f.dataset);
  const auto dspec = dataset_spec_from_json(manifest.spec);

  NetworkSpec spec;
  spec.variant = variant;
  spec.channels = f.channels;
  spec.groups = f.groups;
  spec.fk = dspec.fk;
  if (variant == Variant::data_to_image) {
    spec.pre_layers = f.layers;
    spec.post_layers = f.layers;
    spec.acquisition = dspec.acquisition.with_angle(dspec.angles.at(zero_angle_index(manifest)));
  } else {
    spec.pre_layers = 0;
    spec.post_layers = 2 * f.layers;
  }
  spec.validate();
  TrainConfig tc;
  tc.lr = f.lr;
  tc.epochs = f.epochs;
  tc.seed = f.seed;
  tc.eval_interval = f.eval_interval;
  tc.manifest = f.dataset;
  tc.validate();

  const auto train_set = prepare_split(manifest, "train", variant);
  const auto test_set = prepare_split(manifest, "test", variant);
  auto net = build_network(spec, f.seed);
  log.event("train_start", {{"variant", variant_name(variant)},
                            {"parameters", net.parameter_count()},
                            {"compute_layers", net.compute_layer_count()},
                            {"train", train_set.size()},
                            {"test", test_set.size()}});

  double epoch_loss = 0.0;
  std::size_t epoch_steps = 0;
  TrainHooks hooks;
  hooks.on_step = [&](const HistoryRow& r) {
    epoch_loss += r.loss;
    if (++epoch_steps < train_set.size()) return;
    json fields = {{"epoch", r.epoch}, {"step", r.step}, {"mean_loss", epoch_loss / static_cast<double>(epoch_steps)}};
    if (r.test_psnr) fields["test_psnr"] = *r.test_psnr;
    log.event("epoch", fields);
    epoch_loss = 0.0;
    epoch_steps = 0;
  };
  hooks.on_diverged = [&](const TrainNetwork& n, const TrainResult& partial) {
    save_checkpoint(f.out / "diverged", spec, n, f.seed, partial.epochs, partial.adam, partial.optimizer);
    write_history_csv(f.out / "loss_history.csv", partial.history);
  };
  const json flags = {{"dataset", f.dataset.string()}, {"variant", f.variant}, {"lr", f.lr},
                      {"epochs", f.epochs}, {"seed", f.seed}, {"out", f.out.string()},
                      {"channels", f.channels}, {"layers", f.layers}, {"groups", f.groups},
                      {"eval_interval", f.eval_interval}};
  fs::create_directories(f.out);
  write_json_file(f.out / "run_config.json", run_config("train", {{"flags", flags}, {"network_spec", spec}}));
  const TrainResult res = train(net, train_set, tc, test_set, hooks);
  save_checkpoint(f.out, spec, net, f.seed, res.epochs, res.adam, res.optimizer);
  write_history_csv(f.out / "loss_history.csv", res.history);
  json done = {{"steps", res.steps}, {"epochs", res.epochs}, {"final_loss", res.history.back().loss}};
  if (!test_set.empty()) {
    const auto rep = evaluate(net, test_set);
    done["test_psnr"] = rep.mean_psnr_db;
    done["plain_fk_psnr"] = rep.mean_baseline_psnr_db;
  }
  log.event("train_done", done);
  return kExitOk;
}

int cmd_eval(const Log& log, const fs::path& ckpt, const fs::path& dataset, const std::string& split,
             const fs::path& report) {
  require_file(ckpt / "manifest.json", "checkpoint manifest");
  require_file(dataset, "dataset manifest");
  require_parent_dir(report);
  if (split != "train" && split != "test") throw std::invalid_argument("--split must be train or test");
  const Checkpoint ck = load_checkpoint(ckpt);
  const auto manifest = read_manifest(dataset);
  const auto samples = prepare_split(manifest, split, ck.spec.variant);
  const EvalReport rep = evaluate(ck.network, samples);
  write_eval_csv(report, rep);
  write_json_file(sidecar_config_path(report),
                  run_config("eval", {{"ckpt", ckpt.string()}, {"dataset", dataset.string()},
                                      {"split", split}, {"report", report.string()}}));
  log.event("eval_done", {{"split", split},
                          {"scenarios", rep.scenarios.size()},
                          {"mean_psnr", rep.mean_psnr_db},
                          {"plain_fk_psnr", rep.mean_baseline_psnr_db}});
  return kExitOk;
}

int cmd_verify(const Log& log, const std::string& suite, std::uint64_t seed) {
  const SuiteResult r = run_verify_suite(suite, seed);
  for (const auto& line : r.lines) log.text(line);
  log.event("verify_done", {{"suite", r.suite}, {"passed", r.passed}, {"seconds", r.seconds},
                            {"metrics", r.metrics}});
  return r.passed ? kExitOk : kExitVerify;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plane-wave f-k migration, simulation and training toolkit", "pwfk"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  bool json_logs = false;
  app.add_flag("--json-logs", json_logs, "Line-delimited JSON progress output");

  auto* sim = app.add_subcommand("simulate", "Simulate a dataset of random phantoms");
  std::string spec_path, angles = "75,16";
  std::size_t n = 0;
  fs::path sim_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--spec", spec_path, "Dataset JSON (phantom, acquisition, frame_dtype, fk, n_test)");
  sim->add_option("--n", n, "Number of scenarios")->required();
  sim->add_option("--angles", angles, "<count>,<half_span_deg>")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--seed", sim_seed, "Master seed")->capture_default_str();

  auto* mig = app.add_subcommand("migrate", "Migrate one RF frame");
  fs::path mig_in, mig_out;
  std::string mig_config;
  mig->add_option("--in", mig_in, "Frame PWF")->required();
  mig->add_option("--config", mig_config, "Acquisition JSON (default: the frame's sidecar)");
  mig->add_option("--out", mig_out, "Image PWF")->required();

  auto* cmp = app.add_subcommand("compound", "Migrate and coherently compound a directory of frames");
  fs::path cmp_in, cmp_out;
  cmp->add_option("--in", cmp_in, "Directory of frame_*.pwf with JSON sidecars")->required();
  cmp->add_option("--out", cmp_out, "Image PWF")->required();

  auto* trn = app.add_subcommand("train", "Train a network on a simulated dataset");
  TrainFlags tf;
  trn->add_option("--dataset", tf.dataset, "manifest.json")->required();
  trn->add_option("--variant", tf.variant, "d2i or i2i")->capture_default_str();
  trn->add_option("--lr", tf.lr)->capture_default_str();
  trn->add_option("--epochs", tf.epochs)->capture_default_str();
  trn->add_option("--seed", tf.seed)->capture_default_str();
  trn->add_option("--out", tf.out, "Checkpoint directory")->required();
  trn->add_option("--channels", tf.channels)->capture_default_str();
  trn->add_option("--layers", tf.layers, "Layers per DCNN (i2i gets twice as many)")->capture_default_str();
  trn->add_option("--groups", tf.groups, "Group-norm groups")->capture_default_str();
  trn->add_option("--eval-interval", tf.eval_interval, "Epochs between test evaluations (0 = none)")
      ->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  fs::path ev_ckpt, ev_dataset, ev_report;
  std::string ev_split = "test";
  ev->add_option("--ckpt", ev_ckpt)->required();
  ev->add_option("--dataset", ev_dataset)->required();
  ev->add_option("--split", ev_split)->capture_default_str();
  ev->add_option("--report", ev_report, "CSV report")->required();

  auto* ver = app.add_subcommand("verify", "Run an oracle suite");
  std::string suite;
  std::uint64_t ver_seed = 0;
  ver->add_option("--suite", suite)->required()->check(CLI::IsMember({"adjoint", "focus", "gradcheck"}));
  ver->add_option("--seed", ver_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Log log(out, json_logs);
  try {
    if (sim->parsed()) return cmd_simulate(log, spec_path, n, angles, sim_out, sim_seed);
    if (mig->parsed()) return cmd_migrate(log, mig_in, mig_config, mig_out);
    if (cmp->parsed()) return cmd_compound(log, cmp_in, cmp_out);
    if (trn->parsed()) return cmd_train(log, tf);
    if (ev->parsed()) return cmd_eval(log, ev_ckpt, ev_dataset, ev_split, ev_report);
    if (ver->parsed()) return cmd_verify(log, suite, ver_seed);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pwfk::cli
