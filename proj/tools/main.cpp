// Copyright 2026 The chunkrt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chunkrt/bench.hpp"
#include "chunkrt/client.hpp"
#include "chunkrt/config.hpp"
#include "chunkrt/datagen.hpp"
#include "chunkrt/engine.hpp"
#include "chunkrt/server.hpp"
#include "chunkrt/trainer.hpp"
#include "chunkrt/urdf.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace chunkrt;

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw ConfigError("address must be host:port, got '" + addr + "'");
  }
  return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_gen_data(const RunConfig& run, const std::string& out_dir, int episodes,
                 std::uint64_t seed, bool bimodal, double l1, double l2) {
  ReachDatasetConfig cfg;
  cfg.episodes = episodes;
  cfg.seed = seed;
  cfg.bimodal = bimodal;
  cfg.l1 = l1;
  cfg.l2 = l2;
  cfg.control_period_ns = run.control_period_ns();
  const GeneratedDataset ds = generate_reach_dataset(cfg, out_dir);
  std::cout << "wrote " << ds.episodes.size() << " episodes to " << ds.directory
            << "\n";
  return 0;
}

int cmd_train_toy(const RunConfig& run, const std::string& data_dir,
                  const std::string& task, const std::string& out_path) {
  if (task != "reach2d") throw ConfigError("unknown task '" + task + "'");
  const ReachDataset data = load_reach_dataset(data_dir);

  ToyDenoiser::Shape shape;
  shape.horizon = run.horizon;
  shape.action_dim = data.njoints * kActionDim;
  shape.obs_dim = data.obs_dim();
  shape.hidden = run.hidden;
  ToyDenoiser model(shape, run.seed);

  TrainerConfig tcfg;
  tcfg.steps = run.train_steps;
  tcfg.batch = run.train_batch;
  tcfg.lr = run.lr;
  tcfg.momentum = run.momentum;
  tcfg.tf.ratio = run.tf_ratio;
  tcfg.tf.poisson_mean = run.tf_poisson_mean;
  tcfg.wtm.candidates = run.wtm_candidates;
  tcfg.wtm_enabled = run.wtm_enabled;
  tcfg.weights.lambda_joint = run.lambda_joint;
  tcfg.weights.lambda_pose = run.lambda_pose;
  tcfg.weights.lambda_pose_fk = run.lambda_pose_fk;
  tcfg.weights.smooth_l1_beta = run.smooth_l1_beta;
  tcfg.weights.diffusion_steps = run.diffusion_steps;
  tcfg.seed = run.seed;

  Trainer trainer(model, data.chain, build_cosine_schedule(run.diffusion_steps), tcfg);
  std::mt19937_64 sample_rng(run.seed ^ 0x5eedd00dull);
  std::vector<TrainSample> batch;
  for (int step = 0; step < tcfg.steps; ++step) {
    batch.clear();
    for (int b = 0; b < tcfg.batch; ++b) {
      batch.push_back(data.sample(sample_rng, run.horizon));
    }
    const double loss = trainer.step(batch);
    if (step % 200 == 0 || step + 1 == tcfg.steps) {
      std::cout << "step " << step << " loss " << loss << "\n";
    }
  }

  model.save(out_path);
  ModelMeta meta;
  meta.horizon = run.horizon;
  meta.njoints = data.njoints;
  meta.obs_dim = data.obs_dim();
  meta.obs_repeat = shape.obs_repeat;
  meta.temb_dim = shape.temb_dim;
  meta.hidden = run.hidden;
  meta.activation = "tanh";
  meta.chain_hash = chain_hash(data.chain);
  write_model_meta(out_path + ".json", meta);
  std::cout << "saved " << out_path << "\n";
  return 0;
}

EngineConfig engine_config_from(const RunConfig& run) {
  EngineConfig cfg;
  cfg.rtc_enabled = run.rtc_enabled;
  cfg.fusion_window = run.fusion_window;
  cfg.decay = decay_kind_from_name(run.decay);
  cfg.sample_steps = run.sample_steps;
  cfg.control_period_ns = run.control_period_ns();
  cfg.seed = run.seed;
  return cfg;
}

int cmd_serve(const RunConfig& run, const std::string& model_path,
              const std::string& urdf_path, const std::string& bind) {
  const KinematicChain chain =
      parse_urdf_file(urdf_path, {run.gripper_pattern}).chain;
  auto [host, port] = parse_addr(bind);
  InferenceServer server(load_engine(model_path, chain, engine_config_from(run)),
                         host, port);
  server.start();
  std::cout << "serving " << model_path << " on " << host << ":" << server.port()
            << (run.rtc_enabled ? " (rtc on)" : " (rtc off)") << "\n";
  server.wait();
  return 0;
}

int cmd_client(const RunConfig& run, const std::string& server_addr,
               const std::string& urdf_path, const std::string& mode,
               int delay_inject_ms, const std::string& record_path,
               const std::string& target_csv, const std::string& start_csv,
               int effective_steps) {
  const KinematicChain chain =
      parse_urdf_file(urdf_path, {run.gripper_pattern}).chain;
  auto [host, port] = parse_addr(server_addr);

  ReachTask task;
  if (!start_csv.empty()) {
    task.start_q = parse_double_list(start_csv);
  } else {
    task = sample_reach_task(chain, run.seed);
  }
  if (!target_csv.empty()) {
    const auto t = parse_double_list(target_csv);
    if (t.size() != 2) throw ConfigError("--target expects x,y");
    task.target = {t[0], t[1]};
  }
  if (task.start_q.size() != chain.njoints()) {
    throw DimensionMismatch("--start must list " + std::to_string(chain.njoints()) +
                            " joint values");
  }

  ClientConfig cfg;
  cfg.host = host;
  cfg.port = port;
  cfg.mode = mode == "sync" ? RolloutMode::kSync : RolloutMode::kAsync;
  cfg.effective_steps = effective_steps;
  cfg.delay_inject_ms = delay_inject_ms;
  cfg.success.tolerance_m = run.success_tolerance_m;
  cfg.success.hold_ticks = run.success_hold_ticks;
  cfg.success.max_ticks = run.max_ticks;
  cfg.plant_vmax = run.plant_vmax;
  cfg.control_period_ns = run.control_period_ns();
  cfg.session = run.seed + 1;

  const ClientResult result = cfg.mode == RolloutMode::kSync
                                  ? client_sync(chain, task, cfg)
                                  : client_async(chain, task, cfg);
  if (!record_path.empty()) write_episode(record_path, result.episode);

  const RolloutMetrics& m = result.metrics;
  std::cout << "success=" << (m.success ? "true" : "false")
            << " completion_s=" << m.completion_s << " ticks=" << m.ticks
            << " inference_calls=" << m.inference_calls
            << " max_switch_disc=" << m.max_switch_discontinuity
            << " starved=" << m.starvation_count
            << " final_distance_m=" << m.final_distance_m << "\n";
  return m.success ? 0 : 1;
}

int cmd_bench(const RunConfig& run, const std::string& grid_path, int rollouts,
              const std::string& out_csv, int delay_ms_override,
              int fusion_override, const std::string& decay_override) {
  BenchConfig cfg = bench_config_from_json(read_text_file(grid_path));
  if (rollouts > 0) cfg.rollouts = rollouts;
  cfg.success.tolerance_m = run.success_tolerance_m;
  cfg.success.hold_ticks = run.success_hold_ticks;
  cfg.success.max_ticks = run.max_ticks;
  cfg.plant_vmax = run.plant_vmax;
  cfg.control_period_ns = run.control_period_ns();
  cfg.sample_steps = run.sample_steps;
  if (cfg.seed == 0) cfg.seed = run.seed;
  for (BenchCell& cell : cfg.cells) {
    if (delay_ms_override >= 0) {
      cell.inject_latency_ns = static_cast<std::int64_t>(delay_ms_override) * 1'000'000;
    }
    if (fusion_override > 0) cell.fusion_window = fusion_override;
    if (!decay_override.empty()) cell.decay = decay_kind_from_name(decay_override);
  }

  // The chain is shared by every cell; derive it from the first model's meta
  // via the default fixture when hashes agree.
  const KinematicChain chain = planar_two_link_chain();
  const std::vector<CellSummary> cells = run_benchmark(chain, cfg, &std::cout);
  const std::string csv = benchmark_csv(cells);
  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_csv);
    out << csv;
    std::cout << "wrote " << out_csv << "\n";
  } else {
    std::cout << csv;
  }
  return 0;
}

int cmd_validate(const RunConfig& run, const std::string& urdf_path,
                 const std::string& episode_path, const std::string& cameras_path,
                 double threshold) {
  const KinematicChain chain =
      parse_urdf_file(urdf_path, {run.gripper_pattern}).chain;
  const Episode episode = read_episode(episode_path);
  std::vector<CameraModel> cameras = episode.header.cameras;
  if (!cameras_path.empty()) {
    cameras = cameras_from_json(read_text_file(cameras_path));
  }
  if (cameras.empty()) throw ConfigError("no cameras in episode header or --cameras");
  if (episode.header.chain_hash != 0 &&
      episode.header.chain_hash != chain_hash(chain)) {
    std::cerr << "warning: episode chain hash differs from --urdf\n";
  }
  ValidateOptions opts;
  opts.threshold_px = threshold > 0 ? threshold : run.validate_threshold_px;
  opts.max_out_of_image_fraction = run.validate_out_of_image_fraction;
  const ReprojectionReport report = validate_episode(episode, chain, cameras, opts);
  std::cout << reprojection_report_to_json(report) << "\n";
  std::cout << (report.pass ? "PASS" : "FAIL") << " mean=" << report.episode_mean_px
            << "px max=" << report.episode_max_px << "px threshold="
            << opts.threshold_px << "px\n";
  return report.pass ? 0 : 1;
}

int cmd_check_episode(const RunConfig& run, const std::string& episode_path,
                      double gap_factor, bool prune, const std::string& out_path) {
  const Episode episode = read_episode(episode_path);
  const IntegrityReport report = integrity_check(
      episode, gap_factor > 0 ? gap_factor : run.integrity_gap_factor);
  std::cout << integrity_report_to_json(report) << "\n";
  std::cout << (report.pass ? "PASS" : "FAIL") << " frames=" << report.frame_count
            << " gaps=" << report.dropped_intervals.size()
            << " nonmonotonic=" << report.nonmonotonic_count << "\n";
  if (prune) {
    if (out_path.empty()) throw ConfigError("--prune-static needs --out");
    const Episode pruned = prune_static_frames(episode);
    write_episode(out_path, pruned);
    std::cout << "pruned " << episode.frames.size() - pruned.frames.size()
              << " static frames -> " << out_path << "\n";
  }
  return report.pass ? 0 : 1;
}

int cmd_fk(const RunConfig& run, const std::string& urdf_path,
           const std::string& q_csv) {
  const UrdfParseResult parsed = parse_urdf_file(urdf_path, {run.gripper_pattern});
  const std::vector<double> q = parse_double_list(q_csv);
  for (int idx : limit_violations(parsed.chain, q)) {
    std::cerr << "warning: joint '" << parsed.chain.joints[idx].name
              << "' outside its limits\n";
  }
  const std::vector<Pose> poses = forward_kinematics(parsed.chain, q);
  std::cout << "[";
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Pose& p = poses[i];
    std::cout << (i ? ",\n " : "\n ") << "{\"joint\":\"" << parsed.chain.joints[i].name
              << "\",\"position\":[" << p.position.x << "," << p.position.y << ","
              << p.position.z << "],\"orientation\":[" << p.orientation.w << ","
              << p.orientation.x << "," << p.orientation.y << "," << p.orientation.z
              << "]}";
  }
  std::cout << "\n]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"real-time action-chunk streaming runtime"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic expert dataset");
  std::string gen_out = "dataset";
  int gen_episodes = 100;
  std::uint64_t gen_seed = 0;
  bool gen_bimodal = false;
  double gen_l1 = 0.3, gen_l2 = 0.2;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--episodes", gen_episodes, "episode count");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_flag("--bimodal", gen_bimodal, "emit both elbow branches 50/50");
  gen->add_option("--l1", gen_l1, "first link length (m)");
  gen->add_option("--l2", gen_l2, "second link length (m)");

  // train-toy
  auto* train = app.add_subcommand("train-toy", "train the dense denoiser");
  std::string train_task = "reach2d", train_data = "dataset", train_out = "model.bin";
  int train_steps = -1, train_wtm = -1, train_hidden = -1, train_horizon = -1;
  int train_batch = -1;
  double train_tf = -1.0, train_lr = -1.0;
  std::uint64_t train_seed = 0;
  bool wtm_uniform = false;
  train->add_option("--task", train_task, "task name (reach2d)");
  train->add_option("--data", train_data, "dataset directory");
  train->add_option("--steps", train_steps, "training steps");
  train->add_option("--tf-ratio", train_tf, "teacher forcing ratio");
  train->add_option("--wtm", train_wtm, "candidate trajectories N");
  train->add_flag("--wtm-uniform", wtm_uniform,
                  "keep N candidates but weight them uniformly");
  train->add_option("--seed", train_seed, "rng seed");
  train->add_option("--out", train_out, "model output path");
  train->add_option("--hidden", train_hidden, "hidden width");
  train->add_option("--horizon", train_horizon, "prediction horizon");
  train->add_option("--batch", train_batch, "batch size");
  train->add_option("--lr", train_lr, "learning rate");

  // serve
  auto* serve = app.add_subcommand("serve", "run the inference server");
  std::string serve_model = "model.bin", serve_urdf, serve_bind = "127.0.0.1:9000";
  std::string serve_rtc = "on", serve_decay;
  int serve_fusion = -1;
  std::uint64_t serve_seed = 0;
  serve->add_option("--model", serve_model, "model bundle path")->required();
  serve->add_option("--urdf", serve_urdf, "robot description")->required();
  serve->add_option("--bind", serve_bind, "host:port");
  serve->add_option("--rtc", serve_rtc, "on|off");
  serve->add_option("--decay", serve_decay, "linear|quadratic|exp");
  serve->add_option("--fusion-window", serve_fusion, "fusion window L");
  serve->add_option("--seed", serve_seed, "rng seed");

  // client
  auto* client = app.add_subcommand("client", "drive the simulated plant");
  std::string client_server = "127.0.0.1:9000", client_urdf, client_mode = "async";
  std::string client_record, client_target, client_start;
  int client_delay = 0, client_effective = 0;
  std::uint64_t client_seed = 0;
  client->add_option("--server", client_server, "server host:port");
  client->add_option("--urdf", client_urdf, "robot description")->required();
  client->add_option("--mode", client_mode, "sync|async");
  client->add_option("--delay-inject", client_delay, "artificial delay (ms)");
  client->add_option("--record", client_record, "episode output path");
  client->add_option("--target", client_target, "x,y reach target");
  client->add_option("--start", client_start, "comma-separated start joints");
  client->add_option("--effective-steps", client_effective,
                     "sync mode: steps executed per chunk (0 = all)");
  client->add_option("--seed", client_seed, "rng seed");

  // bench-rtc
  auto* bench = app.add_subcommand("bench-rtc", "closed-loop ablation grid");
  std::string bench_grid, bench_out = "results.csv", bench_decay;
  int bench_rollouts = 0, bench_delay = -1, bench_fusion = 0;
  std::uint64_t bench_seed = 0;
  bench->add_option("--grid", bench_grid, "grid JSON file")->required();
  bench->add_option("--rollouts", bench_rollouts, "rollouts per cell");
  bench->add_option("--out", bench_out, "CSV output path");
  bench->add_option("--delay", bench_delay, "inject latency override (ms)");
  bench->add_option("--fusion-window", bench_fusion, "fusion window override");
  bench->add_option("--decay", bench_decay, "decay override");
  bench->add_option("--seed", bench_seed, "rng seed");

  // validate
  auto* validate = app.add_subcommand("validate", "reprojection consistency check");
  std::string val_urdf, val_episode, val_cameras;
  double val_threshold = 0.0;
  validate->add_option("--urdf", val_urdf, "robot description")->required();
  validate->add_option("--episode", val_episode, "episode file")->required();
  validate->add_option("--cameras", val_cameras, "camera JSON (defaults to header)");
  validate->add_option("--threshold", val_threshold, "pixel threshold");

  // check-episode
  auto* check = app.add_subcommand("check-episode", "integrity monitor");
  std::string check_episode, check_out;
  double check_gap = 0.0;
  bool check_prune = false;
  check->add_option("--episode", check_episode, "episode file")->required();
  check->add_option("--gap-factor", check_gap, "gap threshold factor");
  check->add_flag("--prune-static", check_prune, "drop long static runs");
  check->add_option("--out", check_out, "pruned episode output path");

  // fk
  auto* fk = app.add_subcommand("fk", "forward kinematics");
  std::string fk_urdf, fk_q;
  fk->add_option("--urdf", fk_urdf, "robot description")->required();
  fk->add_option("--q", fk_q, "comma-separated joint positions")->required();

  auto* version = app.add_subcommand("version", "print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig run = load_run_config(config_path);

    if (version->parsed()) {
      std::cout << kVersion << "\n";
      return 0;
    }
    if (gen->parsed()) {
      if (gen->count("--seed")) run.seed = gen_seed;
      return cmd_gen_data(run, gen_out, gen_episodes, run.seed, gen_bimodal, gen_l1,
                          gen_l2);
    }
    if (train->parsed()) {
      if (train->count("--seed")) run.seed = train_seed;
      if (train_steps > 0) run.train_steps = train_steps;
      if (train_tf >= 0.0) run.tf_ratio = train_tf;
      if (train_wtm > 0) run.wtm_candidates = train_wtm;
      if (wtm_uniform) run.wtm_enabled = false;
      if (train_hidden > 0) run.hidden = train_hidden;
      if (train_horizon > 0) run.horizon = train_horizon;
      if (train_batch > 0) run.train_batch = train_batch;
      if (train_lr > 0) run.lr = train_lr;
      return cmd_train_toy(run, train_data, train_task, train_out);
    }
    if (serve->parsed()) {
      if (serve->count("--seed")) run.seed = serve_seed;
      if (serve_rtc == "off") run.rtc_enabled = false;
      if (!serve_decay.empty()) run.decay = serve_decay;
      if (serve_fusion > 0) run.fusion_window = serve_fusion;
      return cmd_serve(run, serve_model, serve_urdf, serve_bind);
    }
    if (client->parsed()) {
      if (client->count("--seed")) run.seed = client_seed;
      return cmd_client(run, client_server, client_urdf, client_mode, client_delay,
                        client_record, client_target, client_start, client_effective);
    }
    if (bench->parsed()) {
      if (bench->count("--seed")) run.seed = bench_seed;
      return cmd_bench(run, bench_grid, bench_rollouts, bench_out, bench_delay,
                       bench_fusion, bench_decay);
    }
    if (validate->parsed()) {
      return cmd_validate(run, val_urdf, val_episode, val_cameras, val_threshold);
    }
    if (check->parsed()) {
      return cmd_check_episode(run, check_episode, check_gap, check_prune, check_out);
    }
    if (fk->parsed()) {
      return cmd_fk(run, fk_urdf, fk_q);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
