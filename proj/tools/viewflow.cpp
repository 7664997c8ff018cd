// Copyright 2026 The viewflow Authors.
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

// viewflow: data preparation, training, evaluation and serving.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <pthread.h>

#include "viewflow/checkpoint.hpp"
#include "viewflow/config.hpp"
#include "viewflow/error.hpp"
#include "viewflow/ingest.hpp"
#include "viewflow/serving.hpp"
#include "viewflow/synthetic.hpp"
#include "viewflow/text.hpp"
#include "viewflow/training.hpp"
#include "viewflow/workflow.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with it.
#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace viewflow;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Records what a command wrote so runs can be compared byte for byte.
class Manifest {
 public:
  Manifest(std::string command, fs::path dir) : command_(std::move(command)), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }
  void add(const std::string& name) { outputs_.push_back(name); }
  json& info() { return info_; }

  void write() const {
    json outputs = json::array();
    for (const auto& name : outputs_) {
      outputs.push_back({{"path", name}, {"sha256", text::sha256_hex(read_file(dir_ / name))}});
    }
    json m{{"tool", "viewflow"},
           {"version", kToolVersion},
           {"command", command_},
           {"info", info_},
           {"outputs", outputs}};
    std::ofstream out(dir_ / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw RuntimeFailure("cannot write manifest in " + dir_.string());
  }

 private:
  std::string command_;
  fs::path dir_;
  std::vector<std::string> outputs_;
  json info_ = json::object();
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
  if (!out) throw RuntimeFailure("cannot write " + p.string());
}

void require_file(const std::string& p, const std::string& what) {
  if (p.empty()) throw ConfigError(what + " path is required");
  if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p);
}

json stats_json(const Dataset& d) {
  auto s = compute_stats(d);
  return {{"users", s.n_users},
          {"articles", s.n_articles},
          {"impressions", s.n_impressions},
          {"candidates", s.n_candidates},
          {"positives", s.n_positive}};
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) {
    RunConfig c;
    c.validate();
    return c;
  }
  require_file(path, "config");
  return RunConfig::load(path);
}

Dataset load_dataset(const std::string& path) {
  require_file(path, "dataset");
  return load_jsonl_file(path);
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::string rule = "planted-bilinear";
  std::string out;
};

int cmd_synth(SynthArgs& a) {
  a.spec.click_rule = click_rule_from_string(a.rule);
  a.spec.validate();
  auto data = generate_synthetic(a.spec);
  Manifest m("synth", a.out);
  save_jsonl_file(m.path("dataset.jsonl").string(), data.dataset);
  m.add("dataset.jsonl");
  json truth{{"rule", to_string(a.spec.click_rule)},
             {"seed", a.spec.seed},
             {"analytic_positive_rate", data.truth.analytic_positive_rate()}};
  write_text(m.path("truth.json"), truth.dump(2) + "\n");
  m.add("truth.json");
  m.info()["stats"] = stats_json(data.dataset);
  m.write();
  std::cout << stats_json(data.dataset).dump() << '\n';
  return 0;
}

// ---- ingest --------------------------------------------------------------

struct IngestArgs {
  std::string news, behaviors, jsonl, out;
  std::size_t subsample_users = 0;
  std::uint64_t seed = 7;
};

std::string format_errors(const std::string& file, const std::vector<RecordError>& errors) {
  std::ostringstream os;
  for (const auto& e : errors) os << file << ':' << e.line << ": " << e.message << '\n';
  return os.str();
}

int cmd_ingest(IngestArgs& a) {
  Dataset d;
  if (!a.jsonl.empty()) {
    require_file(a.jsonl, "jsonl input");
    d = load_jsonl_file(a.jsonl);
  } else {
    require_file(a.news, "news file");
    require_file(a.behaviors, "behaviors file");
    std::ifstream news(a.news), behaviors(a.behaviors);
    auto articles = parse_mind_news(news);
    auto impressions = parse_mind_behaviors(behaviors);
    std::string errors = format_errors(a.news, articles.errors) +
                         format_errors(a.behaviors, impressions.errors);
    if (!errors.empty()) throw DataError("rejected records:\n" + errors);
    for (auto& art : articles.records) d.corpus.add(std::move(art));
    d.impressions = std::move(impressions.records);
    auto dangling = find_dangling_references(d);
    if (!dangling.empty()) {
      std::string msg = "unknown article ids referenced:";
      for (std::size_t i = 0; i < dangling.size() && i < 20; ++i) msg += " " + dangling[i];
      throw DataError(msg);
    }
  }
  if (a.subsample_users > 0) d = subsample_users(d, a.subsample_users, a.seed);
  Manifest m("ingest", a.out);
  save_jsonl_file(m.path("dataset.jsonl").string(), d);
  m.add("dataset.jsonl");
  write_text(m.path("stats.json"), stats_json(d).dump(2) + "\n");
  m.add("stats.json");
  m.info()["stats"] = stats_json(d);
  m.write();
  std::cout << stats_json(d).dump() << '\n';
  return 0;
}

// ---- summarize -----------------------------------------------------------

struct SummarizeArgs {
  std::string config, data, out;
  bool dump_prompts = false;
};

int cmd_summarize(SummarizeArgs& a) {
  RunConfig rc = load_run_config(a.config);
  Dataset d = load_dataset(a.data.empty() ? rc.data.train : a.data);
  auto summarizer = make_summarizer(rc.summarizer);
  Manifest m("summarize", a.out);
  if (a.dump_prompts) {
    const auto tmpl = PromptTemplate::builtin(summarizer->options().article_template);
    std::ostringstream os;
    for (const auto& art : d.corpus.articles()) {
      if (art.body.empty()) continue;
      std::string prompt = render_article_prompt(art, tmpl);
      os << json{{"article", art.id}, {"prompt_sha", text::sha256_hex(prompt)},
                 {"prompt", prompt}}.dump()
         << '\n';
    }
    write_text(m.path("prompts.jsonl"), os.str());
    m.add("prompts.jsonl");
  }
  auto failures = summarizer->summarize_corpus(d.corpus);
  if (!failures.empty()) {
    std::string msg = "summarization failed for " + std::to_string(failures.size()) +
                      " articles:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw RuntimeFailure(msg);
  }
  save_jsonl_file(m.path("dataset.jsonl").string(), d);
  m.add("dataset.jsonl");
  m.info()["client"] = rc.summarizer.client;
  m.info()["client_calls"] = summarizer->client_calls();
  m.write();
  std::cout << json{{"articles", d.corpus.size()},
                    {"client_calls", summarizer->client_calls()}}.dump()
            << '\n';
  return 0;
}

// ---- encode --------------------------------------------------------------

struct EncodeArgs {
  std::string config, data, out;
};

int cmd_encode(EncodeArgs& a) {
  RunConfig rc = load_run_config(a.config);
  Dataset d = load_dataset(a.data.empty() ? rc.data.train : a.data);
  ModelConfig model = complete_schema(rc.model, d.corpus);
  auto wb = Workbench::create(model, rc.summarizer, load_user_attributes(rc.data.user_attributes));
  auto prepared = wb.prepare(d.corpus, d.impressions);
  std::vector<std::pair<std::string, Vec>> records;
  for (const auto& f : prepared.features) {
    records.emplace_back(title_key(f.id), f.title_emb);
    records.emplace_back(body_key(f.id), f.body_emb);
  }
  for (const auto& p : prepared.profiles) {
    if (!p.text.empty()) records.emplace_back(profile_key(p.id), p.embedding);
  }
  Manifest m("encode", a.out);
  save_precomputed_embeddings(m.path("embeddings.bin").string(), wb.embedder->dim(), records);
  m.add("embeddings.bin");
  m.info()["embedder"] = wb.embedder->name();
  m.info()["records"] = records.size();
  m.write();
  std::cout << json{{"records", records.size()}, {"dim", wb.embedder->dim()}}.dump() << '\n';
  return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out;
  std::optional<std::size_t> steps, batch_size, eval_every;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_train(TrainArgs& a) {
  RunConfig rc = load_run_config(a.config);
  if (!a.data.empty()) rc.data.train = a.data;
  if (a.steps) rc.train.max_steps = *a.steps;
  if (a.batch_size) rc.train.batch_size = *a.batch_size;
  if (a.eval_every) rc.train.eval_every = *a.eval_every;
  if (a.lr) rc.train.learning_rate = *a.lr;
  if (a.seed) rc.seed = rc.train.seed = *a.seed;
  if (!a.out.empty()) rc.out = a.out;
  rc.validate();

  Dataset d = load_dataset(rc.data.train);
  ModelConfig model = complete_schema(rc.model, d.corpus);
  model.validate();
  auto wb = Workbench::create(model, rc.summarizer, load_user_attributes(rc.data.user_attributes));

  PreparedDataset train_data, val_data;
  bool has_val = false;
  if (!rc.data.val.empty()) {
    Dataset v = load_dataset(rc.data.val);
    train_data = wb.prepare(d.corpus, d.impressions);
    val_data = wb.prepare(v.corpus, v.impressions);
    has_val = true;
  } else if (rc.train.val_fraction > 0.0) {
    auto [tr, va] = split_by_time(d.impressions, rc.train.val_fraction);
    train_data = wb.prepare(d.corpus, tr);
    val_data = wb.prepare(d.corpus, va);
    has_val = !va.empty();
  } else {
    train_data = wb.prepare(d.corpus, d.impressions);
  }

  auto on_eval = [&](const TrainLogRow& r) {
    if (!a.quiet) {
      std::cerr << "step " << r.step << " loss " << r.loss << " val_auc " << r.val_auc
                << " val_mrr " << r.val_mrr << '\n';
    }
  };
  auto init = ModelParams::initialize(model, rc.train.seed);
  auto result = train(model, rc.train, train_data, has_val ? &val_data : nullptr,
                      std::move(init), on_eval);

  Manifest m("train", rc.out);
  Checkpoint ckpt{model, std::move(result.params), json::object(), {}};
  ckpt.metadata["train"] = rc.train.to_json();
  ckpt.metadata["best_step"] = result.best_step;
  ckpt.metadata["best_val_auc"] = result.best_val_auc;
  save_checkpoint(m.path("checkpoint.bin").string(), ckpt);
  m.add("checkpoint.bin");
  std::ostringstream log;
  write_train_log_csv(log, result.log);
  write_text(m.path("train_log.csv"), log.str());
  m.add("train_log.csv");
  RunConfig resolved = rc;
  resolved.model = model;
  write_text(m.path("config.json"), resolved.to_json().dump(2) + "\n");
  m.add("config.json");
  json summary{{"checkpoint_version", ckpt.version},
               {"steps_run", result.steps_run},
               {"best_step", result.best_step},
               {"best_val_auc", result.best_val_auc},
               {"early_stopped", result.early_stopped},
               {"parameters", ckpt.params.trainable_count()}};
  m.info() = summary;
  m.write();
  std::cout << summary.dump() << '\n';
  return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, data, config, out;
  bool global_auc = false;
};

json flags_json(const AblationFlags& f) {
  return {{"instant_flow", f.instant_flow},
          {"constant_flow", f.constant_flow},
          {"flow_gate", f.flow_gate},
          {"use_instruct_u", f.use_instruct_u},
          {"use_summaries", f.use_summaries}};
}

int cmd_eval(EvalArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  RunConfig rc = load_run_config(a.config);
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  Dataset d = load_dataset(a.data.empty() ? rc.data.test : a.data);
  auto wb = Workbench::create(ckpt.config, rc.summarizer,
                              load_user_attributes(rc.data.user_attributes));
  auto prepared = wb.prepare(d.corpus, d.impressions);
  auto out = evaluate_model(ckpt.config, ckpt.params, prepared,
                            a.global_auc ? AucMode::kGlobal : AucMode::kImpressionMean);
  json report = out.report.to_json();
  report["flags"] = flags_json(ckpt.config.flags);
  report["parameters"] = ckpt.params.trainable_count();
  report["checkpoint_version"] = ckpt.version;
  Manifest m("eval", a.out);
  write_text(m.path("report.json"), report.dump(2) + "\n");
  m.add("report.json");
  m.info()["checkpoint_version"] = ckpt.version;
  m.write();
  std::cout << report.dump() << '\n';
  return 0;
}

// ---- precompute ----------------------------------------------------------

struct PrecomputeArgs {
  std::string checkpoint, data, config, out;
};

int cmd_precompute(PrecomputeArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  RunConfig rc = load_run_config(a.config);
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  Dataset d = load_dataset(a.data.empty() ? rc.data.train : a.data);
  auto wb = Workbench::create(ckpt.config, rc.summarizer,
                              load_user_attributes(rc.data.user_attributes));
  auto users = latest_user_histories(d.impressions);
  RepStore store = precompute(ckpt, d.corpus, users, *wb.features, *wb.profiles);
  Manifest m("precompute", a.out);
  save_rep_store(m.path("store.bin").string(), store);
  m.add("store.bin");
  if (store.partial) {
    std::string errs;
    for (const auto& e : store.errors) errs += e + "\n";
    write_text(m.path("errors.txt"), errs);
    m.add("errors.txt");
    std::cerr << "warning: partial store, " << store.errors.size() << " items failed\n";
  }
  json summary{{"model_version", store.model_version},
               {"articles", store.articles.size()},
               {"users", store.users.size()},
               {"partial", store.partial}};
  m.info() = summary;
  m.write();
  std::cout << summary.dump() << '\n';
  return 0;
}

// ---- serve ---------------------------------------------------------------

struct ServeArgs {
  std::string checkpoint, store, host = "127.0.0.1", port_file;
  int port = 8080;
};

int cmd_serve(ServeArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.store, "store");
  auto ranker = std::make_shared<Ranker>(load_checkpoint(a.checkpoint), load_rep_store(a.store));

  // Signals are taken synchronously by a watcher thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  RankServer server(ranker);
  int port = a.port;
  if (port == 0) {
    port = server.bind_any(a.host);
    if (port < 0) throw RuntimeFailure("cannot bind " + a.host);
  }
  if (!a.port_file.empty()) write_text(a.port_file, std::to_string(port) + "\n");
  std::cerr << "serving model " << ranker->model_version() << " on " << a.host << ':' << port
            << '\n';

  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  bool ok = a.port == 0 ? server.listen_after_bind() : server.listen(a.host, port);
  if (!ok) {
    pthread_kill(watcher.native_handle(), SIGTERM);
    watcher.join();
    throw RuntimeFailure("cannot listen on " + a.host + ":" + std::to_string(port));
  }
  watcher.join();
  return 0;
}

// ---- rank (client) -------------------------------------------------------

struct RankArgs {
  std::string url = "http://127.0.0.1:8080", user, candidates;
  std::size_t top_k = 0;
};

int cmd_rank(RankArgs& a) {
  RankRequest req;
  req.user_id = a.user;
  std::stringstream ss(a.candidates);
  for (std::string id; std::getline(ss, id, ',');) {
    id = text::trim(id);
    if (!id.empty()) req.candidates.push_back(id);
  }
  if (req.candidates.empty()) throw ConfigError("--candidates is empty");
  req.top_k = a.top_k;
  httplib::Client cli(a.url);
  cli.set_read_timeout(30, 0);
  auto res = cli.Post("/rank", req.to_json().dump(), "application/json");
  if (!res) throw RuntimeFailure("request failed: " + httplib::to_string(res.error()));
  std::cout << res->body << '\n';
  if (res->status == 400) throw DataError("server rejected the request");
  if (res->status != 200) throw RuntimeFailure("server returned " + std::to_string(res->status));
  return 0;
}

// ---- diagnose ------------------------------------------------------------

struct DiagnoseArgs {
  std::string checkpoint, data, config, user, out;
};

double cosine(const Vec& a, const Vec& b) {
  const double n = a.norm() * b.norm();
  return n > 0.0 ? a.dot(b) / n : 0.0;
}

int cmd_diagnose(DiagnoseArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  RunConfig rc = load_run_config(a.config);
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (!ckpt.config.flags.instant_flow) {
    throw ConfigError("diagnose needs a checkpoint with the instant flow");
  }
  Dataset d = load_dataset(a.data.empty() ? rc.data.test : a.data);
  const Impression* latest = nullptr;
  for (const auto& imp : d.impressions) {
    if (imp.user_id == a.user && (!latest || imp.timestamp >= latest->timestamp)) latest = &imp;
  }
  if (!latest) throw DataError("unknown user " + a.user);
  if (latest->history.empty()) throw DataError("user " + a.user + " has no history");

  auto wb = Workbench::create(ckpt.config, rc.summarizer,
                              load_user_attributes(rc.data.user_attributes));
  auto prepared = wb.prepare(d.corpus, std::span<const Impression>(latest, 1));
  auto reps = encode_articles(ckpt.config, ckpt.params, prepared.features);
  const auto& imp = prepared.impressions.front();
  Scorer scorer(ckpt.config, ckpt.params);
  std::vector<const Vec*> history;
  for (std::size_t h : imp.history) history.push_back(&reps[h]);
  Vec profile = scorer.profile_vector(prepared.profiles[imp.profile].embedding);

  std::ostringstream sim, att;
  sim << "candidate,step,article_id,cos_instant,cos_constant\n";
  att << "candidate,step,article_id,alpha\n";
  sim.precision(10);
  att.precision(10);
  for (std::size_t c : imp.candidates) {
    const Vec& hc = reps[c];
    const std::string& cid = prepared.article_ids[c];
    Vec alpha = scorer.attention_weights(hc, history);
    Vec ins = scorer.instant_rep(hc, history);
    Vec cons = scorer.constant_rep(profile, hc);
    for (std::size_t i = 0; i < imp.history.size(); ++i) {
      const std::string& hid = prepared.article_ids[imp.history[i]];
      sim << cid << ',' << i << ',' << hid << ',' << cosine(*history[i], ins) << ','
          << cosine(*history[i], cons) << '\n';
      att << cid << ',' << i << ',' << hid << ',' << alpha[static_cast<Eigen::Index>(i)]
          << '\n';
    }
  }
  Manifest m("diagnose", a.out);
  write_text(m.path("similarity.csv"), sim.str());
  m.add("similarity.csv");
  write_text(m.path("attention.csv"), att.str());
  m.add("attention.csv");
  m.info() = {{"user", a.user}, {"impression", latest->id}};
  m.write();
  std::cout << json{{"user", a.user}, {"history", imp.history.size()},
                    {"candidates", imp.candidates.size()}}.dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"viewflow: two-flow news recommendation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  c_synth->add_option("--rule", synth.rule, "planted-bilinear or topic-affinity")
      ->capture_default_str();
  c_synth->add_option("--users", synth.spec.n_users)->capture_default_str();
  c_synth->add_option("--articles", synth.spec.n_articles)->capture_default_str();
  c_synth->add_option("--impressions", synth.spec.n_impressions)->capture_default_str();
  c_synth->add_option("--dim", synth.spec.embed_dim)->capture_default_str();
  c_synth->add_option("--topics", synth.spec.topic_count)->capture_default_str();
  c_synth->add_option("--history", synth.spec.history_length)->capture_default_str();
  c_synth->add_option("--candidates", synth.spec.candidates_per_impression)
      ->capture_default_str();
  c_synth->add_option("--seed", synth.spec.seed)->capture_default_str();
  c_synth->add_option("--out", synth.out)->required();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Convert MIND TSV or JSONL to canonical JSONL");
  c_ingest->add_option("--news", ingest.news, "MIND news.tsv");
  c_ingest->add_option("--behaviors", ingest.behaviors, "MIND behaviors.tsv");
  c_ingest->add_option("--jsonl", ingest.jsonl, "canonical JSONL input");
  c_ingest->add_option("--subsample-users", ingest.subsample_users);
  c_ingest->add_option("--seed", ingest.seed)->capture_default_str();
  c_ingest->add_option("--out", ingest.out)->required();

  SummarizeArgs summarize;
  auto* c_sum = app.add_subcommand("summarize", "Fill article summaries");
  c_sum->add_option("--config", summarize.config);
  c_sum->add_option("--data", summarize.data);
  c_sum->add_option("--out", summarize.out)->required();
  c_sum->add_flag("--dump-prompts", summarize.dump_prompts);

  EncodeArgs encode;
  auto* c_enc = app.add_subcommand("encode", "Write frozen text embeddings");
  c_enc->add_option("--config", encode.config);
  c_enc->add_option("--data", encode.data);
  c_enc->add_option("--out", encode.out)->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model");
  c_train->add_option("--config", tr.config);
  c_train->add_option("--data", tr.data);
  c_train->add_option("--out", tr.out);
  c_train->add_option("--steps", tr.steps);
  c_train->add_option("--batch-size", tr.batch_size);
  c_train->add_option("--eval-every", tr.eval_every);
  c_train->add_option("--lr", tr.lr);
  c_train->add_option("--seed", tr.seed);
  c_train->add_flag("--quiet", tr.quiet);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  c_eval->add_option("--checkpoint", ev.checkpoint)->required();
  c_eval->add_option("--data", ev.data);
  c_eval->add_option("--config", ev.config);
  c_eval->add_option("--out", ev.out)->required();
  c_eval->add_flag("--global-auc", ev.global_auc, "AUC over all pairs instead of per impression");

  PrecomputeArgs pre;
  auto* c_pre = app.add_subcommand("precompute", "Build the serving rep store");
  c_pre->add_option("--checkpoint", pre.checkpoint)->required();
  c_pre->add_option("--data", pre.data);
  c_pre->add_option("--config", pre.config);
  c_pre->add_option("--out", pre.out)->required();

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Serve POST /rank and GET /health");
  c_serve->add_option("--checkpoint", serve.checkpoint)->required();
  c_serve->add_option("--store", serve.store)->required();
  c_serve->add_option("--host", serve.host)->capture_default_str();
  c_serve->add_option("--port", serve.port, "0 picks a free port")->capture_default_str();
  c_serve->add_option("--port-file", serve.port_file, "write the bound port here");

  RankArgs rk;
  auto* c_rank = app.add_subcommand("rank", "Send a rank request to a server");
  c_rank->add_option("--url", rk.url)->capture_default_str();
  c_rank->add_option("--user", rk.user)->required();
  c_rank->add_option("--candidates", rk.candidates, "comma-separated article ids")->required();
  c_rank->add_option("--top-k", rk.top_k);

  DiagnoseArgs diag;
  auto* c_diag = app.add_subcommand("diagnose", "Dump attention and similarity for a user");
  c_diag->add_option("--checkpoint", diag.checkpoint)->required();
  c_diag->add_option("--data", diag.data);
  c_diag->add_option("--config", diag.config);
  c_diag->add_option("--user", diag.user)->required();
  c_diag->add_option("--out", diag.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*c_synth) return cmd_synth(synth);
    if (*c_ingest) return cmd_ingest(ingest);
    if (*c_sum) return cmd_summarize(summarize);
    if (*c_enc) return cmd_encode(encode);
    if (*c_train) return cmd_train(tr);
    if (*c_eval) return cmd_eval(ev);
    if (*c_pre) return cmd_precompute(pre);
    if (*c_serve) return cmd_serve(serve);
    if (*c_rank) return cmd_rank(rk);
    if (*c_diag) return cmd_diagnose(diag);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kRuntime);
  }
  return static_cast<int>(ExitCode::kUsage);
}
