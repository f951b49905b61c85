// Copyright 2026 The ArtiFree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <thread>

#include "artifree/artifact.hpp"
#include "artifree/correlation.hpp"
#include "artifree/embeddings.hpp"
#include "artifree/ensemble.hpp"
#include "artifree/error.hpp"
#include "artifree/manifest.hpp"
#include "artifree/metrics.hpp"
#include "artifree/scheduler.hpp"
#include "artifree/scoring.hpp"
#include "artifree/signal.hpp"
#include "artifree/simulation.hpp"

namespace artifree::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using manifest::Entry;
using manifest::Manifest;
using manifest::UtteranceGroup;

// Raised after outputs are written when a metric is undefined everywhere.
class Sentinel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("ARTIFREE_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno || *end) throw InputError(std::string("bad ARTIFREE_SEED '") + env + "'");
  return v;
}

fs::path TempPath(const fs::path& p) {
  return p.parent_path() / (p.filename().string() + ".tmp");
}

void Commit(const fs::path& tmp, const fs::path& final_path) {
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

void WriteBytesAtomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  const fs::path tmp = TempPath(path);
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for " + path.string());
  }
  Commit(tmp, path);
}

void WriteTextAtomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = TempPath(path);
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
  }
  Commit(tmp, path);
}

void Emit(const std::string& out_path, const std::string& text,
          std::ostream& out) {
  if (out_path.empty() || out_path == "-")
    out << text;
  else
    WriteTextAtomic(out_path, text);
}

std::string ReadText(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<json> ReadJsonLines(const fs::path& path) {
  std::vector<json> out;
  std::istringstream in(ReadText(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return out;
}

json Number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json Optional(const std::optional<double>& v) {
  return v ? Number(*v) : json(nullptr);
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results are placed by
// index so the merge order never depends on scheduling; the first failing
// index is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs < 1 ? 1 : jobs, n));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SamplerFlags {
  int steps = 30;
  double sigma0 = 0.05;
  double decay = 0.9;
  double step_gain = 0.3;
  double halluc_rate = 0.0;
  double halluc_strength = 3.0;
  int reference_steps = 30;

  void add(CLI::App* app) {
    app->add_option("--steps", steps, "reverse steps N")->capture_default_str();
    app->add_option("--sigma0", sigma0, "initial perturbation scale")->capture_default_str();
    app->add_option("--decay", decay, "per-step perturbation decay")->capture_default_str();
    app->add_option("--step-gain", step_gain, "update gain eta")->capture_default_str();
    app->add_option("--halluc-rate", halluc_rate, "hallucination rate in [0,1]")
        ->capture_default_str();
    app->add_option("--halluc-strength", halluc_strength,
                    "bump peak over the 95th-percentile clean magnitude")
        ->capture_default_str();
    app->add_option("--reference-steps", reference_steps,
                    "step count at which the full hazard is reached")
        ->capture_default_str();
  }

  diffusion::SamplerConfig config(std::uint64_t seed) const {
    diffusion::SamplerConfig c;
    c.n_steps = steps;
    c.noise_sigma0 = sigma0;
    c.decay = decay;
    c.step_gain = step_gain;
    c.halluc_rate = halluc_rate;
    c.halluc_strength = halluc_strength;
    c.reference_steps = reference_steps;
    c.seed = seed;
    c.validate();
    return c;
  }
};

emb::EncoderConfig EncoderFromFlags(int num_mel) {
  emb::EncoderConfig c;
  if (num_mel < 2) throw InputError("--num-mel must be >= 2");
  c.num_mel = num_mel;
  return c;
}

std::vector<UtteranceGroup> Groups(const Manifest& m) {
  std::vector<UtteranceGroup> out;
  for (auto& [id, g] : manifest::group(m)) out.push_back(std::move(g));
  return out;
}

emb::EmbeddingSequence LoadEmb(const Manifest& m, const Entry& e) {
  if (!e.emb_path)
    throw InputError(e.utterance_id + ": " + manifest::to_string(e.role) +
                     " entry has no emb_path");
  return emb::read_emb(m.resolve(*e.emb_path));
}

signal::Waveform LoadWav(const Manifest& m, const Entry& e) {
  if (!e.wav_path)
    throw InputError(e.utterance_id + ": " + manifest::to_string(e.role) +
                     " entry has no wav_path");
  return signal::read_wav(m.resolve(*e.wav_path));
}

// The first S candidates (all when S is 0).
std::vector<Entry> TakeCandidates(const UtteranceGroup& g, std::size_t s) {
  if (s == 0) return g.candidates;
  if (g.candidates.size() < s)
    throw EnsembleSizeError(g.id + ": " + std::to_string(g.candidates.size()) +
                            " candidates, --S " + std::to_string(s) + " requested");
  return {g.candidates.begin(), g.candidates.begin() + static_cast<std::ptrdiff_t>(s)};
}

std::vector<emb::EmbeddingSequence> LoadEnsemble(const Manifest& m,
                                                 const UtteranceGroup& g,
                                                 std::size_t s) {
  std::vector<emb::EmbeddingSequence> out;
  for (const auto& c : TakeCandidates(g, s)) out.push_back(LoadEmb(m, c));
  return out;
}

std::string StemFor(const Entry& e) {
  if (e.role == manifest::Role::kCandidate) return "cand" + std::to_string(e.index);
  return manifest::to_string(e.role);
}

std::string JoinLines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + '\n';
  return s;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string manifest_path;
  std::size_t synthetic = 0;
  double seconds = 1.5;
  std::vector<double> snrs{0.0, 5.0, 10.0, 15.0};
  double artifact_fraction = 1.0;
  std::size_t ensemble = 5;
  std::string out_dir;
  std::string noise = "white";
  std::string wav_encoding = "float32";
  int num_mel = 40;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  // Utterances picked by --artifact-fraction hallucinate at this rate.
  SamplerFlags sampler{.halluc_rate = 1.0};
};

std::vector<sim::SourceUtterance> SourcesFromManifest(const std::string& path,
                                                      const SimulateArgs& a) {
  const Manifest m = manifest::read_manifest(path);
  std::vector<sim::SourceUtterance> out;
  for (const auto& g : Groups(m)) {
    if (!g.clean || !g.clean->wav_path)
      throw InputError(g.id + ": simulate requires a clean reference wav; blind "
                       "inputs are not supported");
    sim::SourceUtterance s;
    s.id = g.id;
    s.clean = LoadWav(m, *g.clean);
    std::optional<std::string> noise_path = g.clean->noise_path;
    std::optional<double> snr = g.clean->snr_db;
    if (g.noisy) {
      if (!noise_path) noise_path = g.noisy->noise_path;
      if (!snr) snr = g.noisy->snr_db;
    }
    if (noise_path) s.noise = signal::read_wav(m.resolve(*noise_path));
    s.snr_db = snr ? *snr : a.snrs.front();
    s.transcript_ref = g.clean->transcript_ref;
    s.halluc_rate = a.sampler.halluc_rate;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InputError("manifest has no utterances");
  return out;
}

void CmdSimulate(const SimulateArgs& a, std::ostream& out) {
  if (a.manifest_path.empty() == (a.synthetic == 0))
    throw InputError("simulate needs exactly one of --manifest or --synthetic");
  if (a.artifact_fraction < 0.0 || a.artifact_fraction > 1.0)
    throw InputError("--artifact-fraction must lie in [0,1]");
  const std::uint64_t seed = ResolveSeed(a.seed);
  std::vector<sim::SourceUtterance> sources;
  if (!a.manifest_path.empty()) {
    sources = SourcesFromManifest(a.manifest_path, a);
  } else {
    sources = sim::synthetic_sources(a.synthetic, seed, a.seconds, a.snrs);
    const auto n_art = static_cast<std::size_t>(
        std::llround(a.artifact_fraction * static_cast<double>(a.synthetic)));
    for (std::size_t i = 0; i < sources.size(); ++i)
      sources[i].halluc_rate = i < n_art ? a.sampler.halluc_rate : 0.0;
  }

  sim::SimConfig cfg;
  cfg.sampler = a.sampler.config(seed);
  cfg.encoder = EncoderFromFlags(a.num_mel);
  cfg.ensemble_size = a.ensemble;
  cfg.noise_color = synth::parse_noise_color(a.noise);
  cfg.seed = seed;
  if (a.wav_encoding != "float32" && a.wav_encoding != "pcm16")
    throw InputError("--wav-encoding must be float32 or pcm16");
  const auto enc = a.wav_encoding == "pcm16" ? signal::WavEncoding::kPcm16
                                             : signal::WavEncoding::kFloat32;
  const fs::path root(a.out_dir);
  fs::create_directories(root);

  std::vector<std::vector<Entry>> entries(sources.size());
  ParallelFor(sources.size(), a.jobs, [&](std::size_t u) {
    const auto r = sim::simulate(sources[u], cfg);
    const fs::path dir = root / r.id;
    fs::create_directories(dir);
    // Embeddings are taken from the samples as stored, so `embed` on the
    // written files reproduces them exactly.
    auto put = [&](const std::string& stem, const signal::Waveform& w, Entry entry) {
      const fs::path wav = dir / (stem + ".wav");
      const fs::path embp = dir / (stem + ".emb");
      const auto bytes = signal::encode_wav(w, enc);
      WriteBytesAtomic(wav, bytes);
      emb::write_emb(emb::reference_encode(signal::decode_wav(bytes), cfg.encoder),
                     TempPath(embp));
      Commit(TempPath(embp), embp);
      entry.utterance_id = r.id;
      entry.wav_path = r.id + "/" + stem + ".wav";
      entry.emb_path = r.id + "/" + stem + ".emb";
      entries[u].push_back(std::move(entry));
    };
    Entry clean;
    clean.role = manifest::Role::kClean;
    clean.transcript_ref = r.transcript_ref;
    put("clean", r.clean, clean);
    Entry noisy;
    noisy.role = manifest::Role::kNoisy;
    noisy.snr_db = r.snr_db;
    noisy.label = r.label ? 1 : 0;
    put("noisy", r.noisy, noisy);
    for (std::size_t k = 0; k < r.candidates.size(); ++k) {
      Entry c;
      c.role = manifest::Role::kCandidate;
      c.index = static_cast<int>(k);
      c.hallucinated = r.candidates[k].result.blob.has_value();
      c.transcript_hyp = r.candidates[k].transcript_hyp;
      put("cand" + std::to_string(k), r.candidates[k].result.wave, c);
    }
  });

  Manifest m;
  m.base_dir = root;
  for (auto& e : entries)
    for (auto& x : e) m.entries.push_back(std::move(x));
  std::vector<std::string> lines;
  for (const auto& e : m.entries) lines.push_back(manifest::serialize_entry(e));
  WriteTextAtomic(root / "manifest.jsonl", JoinLines(lines));
  out << (root / "manifest.jsonl").string() << '\n';
}

// ---------------------------------------------------------------------------
// embed

void CmdEmbed(const std::string& manifest_path, const std::string& out_dir,
              int num_mel, int jobs, std::ostream& out) {
  const Manifest m = manifest::read_manifest(manifest_path);
  const auto enc = EncoderFromFlags(num_mel);
  const fs::path root(out_dir);
  fs::create_directories(root);
  std::vector<Entry> entries = m.entries;
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.utterance_id != b.utterance_id) return a.utterance_id < b.utterance_id;
    if (a.role != b.role) return a.role < b.role;
    return a.index < b.index;
  });
  ParallelFor(entries.size(), jobs, [&](std::size_t i) {
    Entry& e = entries[i];
    if (!e.wav_path) return;
    const fs::path wav = m.resolve(*e.wav_path);
    const auto seq = emb::reference_encode(signal::read_wav(wav), enc);
    const std::string rel = e.utterance_id + "/" + StemFor(e) + ".emb";
    const fs::path dst = root / rel;
    fs::create_directories(dst.parent_path());
    emb::write_emb(seq, TempPath(dst));
    Commit(TempPath(dst), dst);
    e.emb_path = rel;
    e.wav_path = fs::proximate(fs::absolute(wav), fs::absolute(root)).generic_string();
    if (e.noise_path)
      e.noise_path = fs::proximate(fs::absolute(m.resolve(*e.noise_path)),
                                   fs::absolute(root)).generic_string();
  });
  std::vector<std::string> lines;
  for (const auto& e : entries) lines.push_back(manifest::serialize_entry(e));
  WriteTextAtomic(root / "manifest.jsonl", JoinLines(lines));
  out << (root / "manifest.jsonl").string() << '\n';
}

// ---------------------------------------------------------------------------
// detect / calibrate

double TauFromArgs(const std::optional<double>& tau, const std::string& calibration) {
  if (tau && !calibration.empty())
    throw InputError("give either --tau or --calibration, not both");
  if (tau) return *tau;
  if (calibration.empty())
    throw InputError("detect needs --tau or --calibration; tau is never assumed");
  const auto j = json::parse(ReadText(calibration));
  return j.at("tau").get<double>();
}

void CmdDetect(const std::string& manifest_path, const std::optional<double>& tau_flag,
               const std::string& calibration, std::size_t s, int jobs,
               const std::string& out_path, std::ostream& out) {
  const double tau = TauFromArgs(tau_flag, calibration);
  if (!std::isfinite(tau)) throw InputError("tau must be finite");
  const Manifest m = manifest::read_manifest(manifest_path);
  const auto groups = Groups(m);
  std::vector<std::string> lines(groups.size());
  ParallelFor(groups.size(), jobs, [&](std::size_t i) {
    const auto ens = LoadEnsemble(m, groups[i], s);
    const auto rep = artifact::predict(ens, tau);
    json j;
    j["utterance_id"] = groups[i].id;
    j["a"] = Number(rep.a);
    j["tau"] = tau;
    j["flag"] = rep.flag ? 1 : 0;
    j["ensemble_size"] = rep.ensemble_size;
    json v = json::array();
    for (double x : rep.v) v.push_back(Number(x));
    j["v"] = std::move(v);
    lines[i] = j.dump();
  });
  Emit(out_path, JoinLines(lines), out);
}

bool LabelOf(const UtteranceGroup& g) {
  for (const auto* e : {g.noisy ? &*g.noisy : nullptr, g.clean ? &*g.clean : nullptr})
    if (e && e->label) return *e->label != 0;
  bool any = false, seen = false;
  for (const auto& c : g.candidates) {
    if (c.label) return *c.label != 0;
    if (c.hallucinated) {
      seen = true;
      any = any || *c.hallucinated;
    }
  }
  if (!seen) throw InputError(g.id + ": no artifact label in manifest");
  return any;
}

void CmdCalibrate(const std::string& manifest_path, std::size_t s, int jobs,
                  const std::string& out_path, std::ostream& out) {
  const Manifest m = manifest::read_manifest(manifest_path);
  const auto groups = Groups(m);
  std::vector<artifact::ScoredExample> ex(groups.size());
  std::vector<std::size_t> used(groups.size());
  ParallelFor(groups.size(), jobs, [&](std::size_t i) {
    const auto ens = LoadEnsemble(m, groups[i], s);
    used[i] = ens.size();
    ex[i].score = artifact::artifact_score(artifact::frame_variance(ens));
    ex[i].artifact = LabelOf(groups[i]);
  });
  const auto cal = artifact::calibrate_threshold(ex);
  json j;
  j["tau"] = cal.tau;
  j["balanced_accuracy"] = cal.balanced_accuracy;
  j["positives"] = cal.positives;
  j["negatives"] = cal.negatives;
  // Smallest ensemble actually scored; equals --S when it is given.
  j["ensemble_size"] = used.empty() ? s : *std::min_element(used.begin(), used.end());
  j["utterances"] = groups.size();
  Emit(out_path, j.dump() + "\n", out);
}

// ---------------------------------------------------------------------------
// select

void CmdSelect(const std::string& manifest_path, const std::string& heuristic,
               const std::string& method_name, std::size_t s, int jobs,
               const std::string& out_path, std::ostream& out) {
  const auto h = ensemble::parse_heuristic(heuristic);
  const auto method = ensemble::parse_method(method_name);
  const Manifest m = manifest::read_manifest(manifest_path);
  const auto groups = Groups(m);
  std::vector<std::string> lines(groups.size());
  std::atomic<std::size_t> failed{0};
  ParallelFor(groups.size(), jobs, [&](std::size_t i) {
    const auto& g = groups[i];
    const auto cands = TakeCandidates(g, s);
    std::vector<emb::EmbeddingSequence> ens;
    for (const auto& c : cands) ens.push_back(LoadEmb(m, c));
    const auto mat = ensemble::similarity_matrix(ens, method);
    json j;
    j["utterance_id"] = g.id;
    j["heuristic"] = ensemble::to_string(h);
    j["method"] = ensemble::to_string(method);
    std::optional<ensemble::SelectionResult> sel;
    try {
      if (h == ensemble::Heuristic::kCentrality) {
        sel = ensemble::select_centrality(mat);
      } else {
        const auto& ref = h == ensemble::Heuristic::kClean ? g.clean : g.noisy;
        if (!ref)
          throw InputError(g.id + ": heuristic " + heuristic + " needs a " +
                           heuristic + " entry");
        sel = ensemble::select_by_reference(ens, LoadEmb(m, *ref), h, method);
      }
    } catch (const SelectionError&) {
      ++failed;
    }
    j["chosen_index"] = sel ? json(cands[sel->chosen].index) : json(nullptr);
    json scores = json::array();
    if (sel)
      for (const auto& sc : sel->scores) scores.push_back(Optional(sc));
    j["scores"] = std::move(scores);
    json c = json::array();
    for (std::size_t r = 0; r < mat.size; ++r) {
      json row = json::array();
      for (std::size_t q = 0; q < mat.size; ++q) row.push_back(Number(mat.at(r, q)));
      c.push_back(std::move(row));
    }
    j["C"] = std::move(c);
    lines[i] = j.dump();
  });
  Emit(out_path, JoinLines(lines), out);
  if (!groups.empty() && failed == groups.size())
    throw Sentinel("no utterance had a defined selection score");
}

std::map<std::string, int> ReadSelection(const std::string& path) {
  std::map<std::string, int> out;
  for (const auto& j : ReadJsonLines(path)) {
    const auto id = j.at("utterance_id").get<std::string>();
    if (!j.at("chosen_index").is_null()) out[id] = j.at("chosen_index").get<int>();
  }
  return out;
}

const Entry& ChosenCandidate(const UtteranceGroup& g,
                             const std::map<std::string, int>* selection,
                             int fallback) {
  int want = fallback;
  if (selection) {
    auto it = selection->find(g.id);
    if (it == selection->end())
      throw InputError(g.id + ": no selection recorded for utterance");
    want = it->second;
  }
  for (const auto& c : g.candidates)
    if (c.index == want) return c;
  throw InputError(g.id + ": no candidate with index " + std::to_string(want));
}

// ---------------------------------------------------------------------------
// metrics / correlate

std::map<std::string, std::pair<std::optional<double>, std::optional<double>>>
ReadQuality(const std::string& path) {
  std::istringstream in(ReadText(path));
  const auto recs = metrics::read_metric_csv(in);
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> out;
  for (const auto& r : recs) out[r.utterance_id] = {r.pesq, r.stoi};
  return out;
}

void CmdMetrics(const std::string& manifest_path, const std::string& selection_path,
                int candidate, const std::string& quality_path, int jobs,
                const std::string& out_path, std::ostream& out) {
  const Manifest m = manifest::read_manifest(manifest_path);
  const auto groups = Groups(m);
  std::optional<std::map<std::string, int>> selection;
  if (!selection_path.empty()) selection = ReadSelection(selection_path);
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> quality;
  if (!quality_path.empty()) quality = ReadQuality(quality_path);

  std::vector<metrics::MetricRecord> recs(groups.size());
  ParallelFor(groups.size(), jobs, [&](std::size_t i) {
    const auto& g = groups[i];
    if (!g.clean) throw InputError(g.id + ": metrics need a clean entry");
    const Entry& cand = ChosenCandidate(g, selection ? &*selection : nullptr, candidate);
    auto& r = recs[i];
    r.utterance_id = g.id;
    const auto clean = LoadWav(m, *g.clean);
    const auto test = LoadWav(m, cand);
    r.lsd = metrics::lsd(clean, test);
    r.vad_mismatch_s = metrics::vad_mismatch(clean, test);
    r.formant_bw_div = metrics::formant_bandwidth_divergence(clean, test);
    if (g.clean->emb_path && cand.emb_path)
      r.emb_cos_dist = metrics::emb_cosine_distance(LoadEmb(m, *g.clean), LoadEmb(m, cand));
    if (g.noisy && g.noisy->snr_db) r.snr_db = g.noisy->snr_db;
    auto q = quality.find(g.id);
    if (q != quality.end()) {
      r.pesq = q->second.first;
      r.stoi = q->second.second;
    }
  });
  std::ostringstream csv;
  metrics::write_metric_csv(recs, csv);
  Emit(out_path, csv.str(), out);
  if (!recs.empty() &&
      std::none_of(recs.begin(), recs.end(),
                   [](const auto& r) { return r.formant_bw_div.has_value(); }))
    throw Sentinel("formant_bw_div undefined on all inputs (no co-voiced frames)");
}

void CmdCorrelate(const std::string& metrics_path, const std::string& out_path,
                  std::ostream& out) {
  std::istringstream in(ReadText(metrics_path));
  const auto recs = metrics::read_metric_csv(in);
  const auto table = metrics::correlation_table(recs);
  std::ostringstream csv;
  metrics::write_correlation_csv(table, csv);
  Emit(out_path, csv.str(), out);
  if (table.all_undefined())
    throw Sentinel("every correlation is undefined (too few pairs or zero variance)");
}

// ---------------------------------------------------------------------------
// wer

void AddCounts(json& j, const metrics::EditCounts& c) {
  j["distance"] = c.distance;
  j["substitutions"] = c.substitutions;
  j["insertions"] = c.insertions;
  j["deletions"] = c.deletions;
  j["ref_length"] = c.ref_length;
  j["error_rate"] =
      c.ref_length ? json(metrics::error_rate(c)) : json(nullptr);
}

void CmdWer(const std::string& manifest_path, const std::string& selection_path,
            int candidate, const std::string& ref_path, const std::string& hyp_path,
            const std::string& level_name, const std::string& out_path,
            const std::string& summary_path, std::ostream& out) {
  const auto level = metrics::parse_token_level(level_name);
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> pairs;
  if (!manifest_path.empty()) {
    if (!ref_path.empty() || !hyp_path.empty())
      throw InputError("give either --manifest or --ref/--hyp");
    const Manifest m = manifest::read_manifest(manifest_path);
    std::optional<std::map<std::string, int>> selection;
    if (!selection_path.empty()) selection = ReadSelection(selection_path);
    for (const auto& g : Groups(m)) {
      std::optional<std::string> ref;
      if (g.clean) ref = g.clean->transcript_ref;
      if (!ref && g.noisy) ref = g.noisy->transcript_ref;
      if (!ref) throw InputError(g.id + ": no transcript_ref");
      const Entry& c = ChosenCandidate(g, selection ? &*selection : nullptr, candidate);
      if (!c.transcript_hyp) throw InputError(g.id + ": chosen candidate has no transcript_hyp");
      pairs.push_back({g.id, {*ref, *c.transcript_hyp}});
    }
  } else {
    if (ref_path.empty() || hyp_path.empty())
      throw InputError("wer needs --manifest or both --ref and --hyp");
    const auto refs = metrics::read_transcripts(ref_path);
    const auto hyps = metrics::read_transcripts(hyp_path);
    for (const auto& [id, r] : refs) {
      auto h = hyps.find(id);
      if (h == hyps.end()) throw InputError("no hypothesis for " + id);
      pairs.push_back({id, {r, h->second}});
    }
    for (const auto& [id, h] : hyps)
      if (!refs.count(id)) throw InputError("no reference for " + id);
  }

  metrics::EditCounts total;
  std::vector<std::string> lines;
  for (const auto& [id, rh] : pairs) {
    const auto c = metrics::edit_distance(metrics::tokenize(rh.first, level),
                                          metrics::tokenize(rh.second, level));
    total += c;
    json j;
    j["utterance_id"] = id;
    AddCounts(j, c);
    lines.push_back(j.dump());
  }
  json summary;
  summary["level"] = level_name;
  summary["utterances"] = pairs.size();
  AddCounts(summary, total);
  Emit(out_path, JoinLines(lines), out);
  if (!summary_path.empty()) WriteTextAtomic(summary_path, summary.dump() + "\n");
  else if (!out_path.empty() && out_path != "-") out << summary.dump() << '\n';
  if (total.ref_length == 0)
    throw Sentinel("every reference is empty; error rate undefined");
}

// ---------------------------------------------------------------------------
// sweep-n / eval-schedule

struct DatasetArgs {
  std::string manifest_path;
  std::size_t synthetic = 0;
  double seconds = 1.0;
  std::vector<double> snrs{0.0, 5.0, 10.0, 15.0};
  std::string noise = "white";
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--manifest", manifest_path, "manifest with clean+noisy wavs");
    app->add_option("--synthetic", synthetic, "generate K synthetic utterances");
    app->add_option("--seconds", seconds, "synthetic utterance length")->capture_default_str();
    app->add_option("--snr", snrs, "SNR values cycled over synthetic utterances")->delimiter(',');
    app->add_option("--noise", noise, "white|pink")->capture_default_str();
    app->add_option("--seed", seed, "seed (default: ARTIFREE_SEED or 0)");
  }
};

std::vector<sched::DatasetItem> LoadDataset(const DatasetArgs& a, std::uint64_t seed) {
  if (a.manifest_path.empty() == (a.synthetic == 0))
    throw InputError("need exactly one of --manifest or --synthetic");
  std::vector<sched::DatasetItem> out;
  if (a.synthetic) {
    const auto color = synth::parse_noise_color(a.noise);
    for (auto& s : sim::synthetic_sources(a.synthetic, seed, a.seconds, a.snrs)) {
      sched::DatasetItem it;
      it.id = s.id;
      it.noisy = sim::make_noisy(s, color, seed);
      it.clean = std::move(s.clean);
      it.snr_db = s.snr_db;
      it.snr_source = signal::SnrSource::kOracle;
      out.push_back(std::move(it));
    }
    return out;
  }
  const Manifest m = manifest::read_manifest(a.manifest_path);
  for (const auto& g : Groups(m)) {
    if (!g.clean || !g.noisy)
      throw InputError(g.id + ": schedule evaluation needs clean and noisy entries");
    sched::DatasetItem it;
    it.id = g.id;
    it.clean = LoadWav(m, *g.clean);
    it.noisy = LoadWav(m, *g.noisy);
    std::optional<double> snr = g.noisy->snr_db ? g.noisy->snr_db : g.clean->snr_db;
    auto [db, src] = sched::resolve_snr(snr, it.noisy, it.clean);
    it.snr_db = db;
    it.snr_source = src;
    out.push_back(std::move(it));
  }
  if (out.empty()) throw InputError("manifest has no utterances");
  return out;
}

struct EvalArgs {
  std::size_t ensemble = 3;
  std::string cost = "measured";
  double seconds_per_step = 0.965 / 30.0;
  int repeats = 5;
  bool no_quality = false;
  std::string external;
  int num_mel = 40;

  void add(CLI::App* app) {
    app->add_option("--S", ensemble, "ensemble size for the artifact score")
        ->capture_default_str();
    app->add_option("--cost", cost, "measured|linear")->capture_default_str();
    app->add_option("--seconds-per-step", seconds_per_step, "linear cost per step")
        ->capture_default_str();
    app->add_option("--repeats", repeats, "timing repeats (median)")->capture_default_str();
    app->add_flag("--no-quality", no_quality, "skip LSD and artifact score");
    app->add_option("--external", external,
                    "CSV utterance_id,n_steps,<quality columns> for external quality");
    app->add_option("--num-mel", num_mel, "encoder mel bands")->capture_default_str();
  }

  sched::EvalConfig config(const diffusion::SamplerConfig& s,
                           const sched::ExternalQuality* ext) const {
    sched::EvalConfig c;
    c.sampler = s;
    c.encoder = EncoderFromFlags(num_mel);
    c.ensemble_size = ensemble;
    if (cost == "linear") {
      c.cost.kind = sched::CostModel::Kind::kLinear;
    } else if (cost != "measured") {
      throw InputError("--cost must be measured or linear");
    }
    c.cost.seconds_per_step = seconds_per_step;
    c.cost.repeats = repeats;
    c.compute_quality = !no_quality;
    c.external = ext;
    return c;
  }
};

std::optional<sched::ExternalQuality> LoadExternal(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::istringstream in(ReadText(path));
  return sched::ExternalQuality::read_csv(in);
}

void CmdSweep(const DatasetArgs& d, const EvalArgs& e, const SamplerFlags& s,
              const std::vector<int>& n_values, const std::string& out_path,
              std::ostream& out) {
  const auto seed = ResolveSeed(d.seed);
  const auto data = LoadDataset(d, seed);
  const auto ext = LoadExternal(e.external);
  const auto cfg = e.config(s.config(seed), ext ? &*ext : nullptr);
  const auto rows = sched::sweep_n(data, n_values, cfg);
  std::ostringstream csv;
  sched::write_sweep_csv(rows, ext ? ext->columns : std::vector<std::string>{}, csv);
  Emit(out_path, csv.str(), out);
}

void CmdEvalSchedule(const DatasetArgs& d, const EvalArgs& e, const SamplerFlags& s,
                     const std::vector<std::string>& schedule_texts,
                     const std::string& baseline_text, const std::string& out_path,
                     const std::string& per_utt_path, std::ostream& out) {
  const auto seed = ResolveSeed(d.seed);
  const auto data = LoadDataset(d, seed);
  const auto ext = LoadExternal(e.external);
  const auto cfg = e.config(s.config(seed), ext ? &*ext : nullptr);
  std::vector<sched::NSchedule> schedules;
  for (const auto& t : schedule_texts) schedules.push_back(sched::NSchedule::parse(t));
  const auto baseline = sched::NSchedule::parse(baseline_text);
  const auto report = sched::evaluate_schedule(data, schedules, baseline, cfg);
  std::ostringstream csv;
  sched::write_report_csv(report, csv);
  Emit(out_path, csv.str(), out);
  if (!per_utt_path.empty()) {
    std::ostringstream pu;
    pu << "utterance_id,snr_db,snr_source,band";
    for (const auto& r : report.rows) pu << ",\"N " << r.label << '"';
    pu << '\n';
    for (const auto& it : data) {
      const auto band = sched::band_of_snr(it.snr_db);
      pu << it.id << ',' << metrics::format_double(it.snr_db) << ','
         << signal::to_string(it.snr_source) << ',' << sched::band_name(band);
      for (const auto& r : report.rows) pu << ',' << sched::n_for_input(it.snr_db, r.schedule);
      pu << '\n';
    }
    WriteTextAtomic(per_utt_path, pu.str());
  }
}

// ---------------------------------------------------------------------------
// report

void CmdReport(const std::string& detect_path, const std::vector<std::string>& select_paths,
               const std::string& wer_path, const std::string& calibration_path,
               const std::string& out_path, std::ostream& out) {
  if (detect_path.empty() && select_paths.empty() && wer_path.empty() &&
      calibration_path.empty())
    throw InputError("report needs at least one of --detect, --select, --wer, --calibration");
  json rep;
  if (!detect_path.empty()) {
    std::size_t n = 0, flagged = 0;
    double sum_a = 0.0;
    for (const auto& j : ReadJsonLines(detect_path)) {
      ++n;
      flagged += j.at("flag").get<int>() != 0;
      sum_a += j.at("a").get<double>();
    }
    json d;
    d["utterances"] = n;
    d["flagged"] = flagged;
    d["flag_rate"] = n ? json(static_cast<double>(flagged) / n) : json(nullptr);
    d["mean_a"] = n ? json(sum_a / n) : json(nullptr);
    rep["detect"] = std::move(d);
  }
  if (!select_paths.empty()) {
    json arr = json::array();
    for (const auto& p : select_paths) {
      std::map<int, std::size_t> hist;
      std::size_t n = 0, undefined = 0;
      std::string heuristic;
      for (const auto& j : ReadJsonLines(p)) {
        ++n;
        heuristic = j.at("heuristic").get<std::string>();
        if (j.at("chosen_index").is_null())
          ++undefined;
        else
          ++hist[j.at("chosen_index").get<int>()];
      }
      json s;
      s["file"] = fs::path(p).filename().string();
      s["heuristic"] = heuristic;
      s["utterances"] = n;
      s["undefined"] = undefined;
      json h = json::object();
      for (const auto& [k, v] : hist) h[std::to_string(k)] = v;
      s["chosen_counts"] = std::move(h);
      arr.push_back(std::move(s));
    }
    rep["select"] = std::move(arr);
  }
  if (!wer_path.empty()) {
    metrics::EditCounts total;
    std::size_t n = 0;
    for (const auto& j : ReadJsonLines(wer_path)) {
      ++n;
      metrics::EditCounts c;
      c.distance = j.at("distance").get<std::size_t>();
      c.substitutions = j.at("substitutions").get<std::size_t>();
      c.insertions = j.at("insertions").get<std::size_t>();
      c.deletions = j.at("deletions").get<std::size_t>();
      c.ref_length = j.at("ref_length").get<std::size_t>();
      total += c;
    }
    json w;
    w["utterances"] = n;
    AddCounts(w, total);
    rep["wer"] = std::move(w);
  }
  if (!calibration_path.empty())
    rep["calibration"] = json::parse(ReadText(calibration_path));
  Emit(out_path, rep.dump(2) + "\n", out);
}

void ErrorLine(std::ostream& err, const std::string& key, const std::string& kind,
               const std::string& message) {
  json j;
  j[key] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Artifact detection and ensemble selection for generative "
               "speech enhancement"};
  app.name("artifree");
  app.require_subcommand(1);

  // simulate
  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "generate controlled ensembles");
  sim_cmd->add_option("--manifest", sim_args.manifest_path,
                      "clean entries with noise_path/snr_db");
  sim_cmd->add_option("--synthetic", sim_args.synthetic, "generate K utterances");
  sim_cmd->add_option("--seconds", sim_args.seconds, "synthetic length")->capture_default_str();
  sim_cmd->add_option("--snr", sim_args.snrs, "SNR values (cycled)")->delimiter(',');
  sim_cmd->add_option("--artifact-fraction", sim_args.artifact_fraction,
                      "share of synthetic utterances given --halluc-rate")
      ->capture_default_str();
  sim_cmd->add_option("--S", sim_args.ensemble, "ensemble size")->capture_default_str();
  sim_cmd->add_option("--out", sim_args.out_dir, "output directory")->required();
  sim_cmd->add_option("--noise", sim_args.noise, "white|pink")->capture_default_str();
  sim_cmd->add_option("--wav-encoding", sim_args.wav_encoding, "float32|pcm16")
      ->capture_default_str();
  sim_cmd->add_option("--num-mel", sim_args.num_mel, "encoder mel bands")->capture_default_str();
  sim_cmd->add_option("--jobs", sim_args.jobs, "worker threads")->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "seed (default: ARTIFREE_SEED or 0)");
  sim_args.sampler.add(sim_cmd);

  // embed
  std::string emb_manifest, emb_out;
  int emb_mel = 40, emb_jobs = 1;
  auto* emb_cmd = app.add_subcommand("embed", "encode every wav in a manifest to EMB1");
  emb_cmd->add_option("--manifest", emb_manifest, "input manifest")->required();
  emb_cmd->add_option("--out", emb_out, "output directory")->required();
  emb_cmd->add_option("--num-mel", emb_mel, "encoder mel bands")->capture_default_str();
  emb_cmd->add_option("--jobs", emb_jobs, "worker threads")->capture_default_str();

  // detect
  std::string det_manifest, det_cal, det_out;
  std::optional<double> det_tau;
  std::size_t det_s = 0;
  int det_jobs = 1;
  auto* det_cmd = app.add_subcommand("detect", "ensemble-variance artifact detection");
  det_cmd->add_option("--manifest", det_manifest, "manifest with candidate EMB1s")->required();
  det_cmd->add_option("--tau", det_tau, "threshold; flag = a > tau");
  det_cmd->add_option("--calibration", det_cal, "calibrate output to take tau from");
  det_cmd->add_option("--S", det_s, "use the first S candidates (0 = all)");
  det_cmd->add_option("--jobs", det_jobs, "worker threads");
  det_cmd->add_option("--out", det_out, "JSONL output (default stdout)");

  // calibrate
  std::string cal_manifest, cal_out;
  std::size_t cal_s = 0;
  int cal_jobs = 1;
  auto* cal_cmd = app.add_subcommand("calibrate", "choose tau by balanced accuracy");
  cal_cmd->add_option("--manifest", cal_manifest, "labelled manifest")->required();
  cal_cmd->add_option("--S", cal_s, "use the first S candidates (0 = all)");
  cal_cmd->add_option("--jobs", cal_jobs, "worker threads");
  cal_cmd->add_option("--out", cal_out, "JSON output (default stdout)");

  // select
  std::string sel_manifest, sel_out, sel_heur = "centrality", sel_method = "flatten-pearson";
  std::size_t sel_s = 0;
  int sel_jobs = 1;
  auto* sel_cmd = app.add_subcommand("select", "pick one candidate per utterance");
  sel_cmd->add_option("--manifest", sel_manifest, "manifest with EMB1s")->required();
  sel_cmd->add_option("--heuristic", sel_heur, "centrality|clean|noisy")->capture_default_str();
  sel_cmd->add_option("--method", sel_method, "flatten-pearson|mean-frame-cosine")
      ->capture_default_str();
  sel_cmd->add_option("--S", sel_s, "use the first S candidates (0 = all)");
  sel_cmd->add_option("--jobs", sel_jobs, "worker threads");
  sel_cmd->add_option("--out", sel_out, "JSONL output (default stdout)");

  // metrics
  std::string met_manifest, met_sel, met_quality, met_out;
  int met_cand = 0, met_jobs = 1;
  auto* met_cmd = app.add_subcommand("metrics", "artifact-sensitive metrics vs clean");
  met_cmd->add_option("--manifest", met_manifest, "manifest")->required();
  met_cmd->add_option("--selection", met_sel, "select output naming the candidate");
  met_cmd->add_option("--candidate", met_cand, "candidate index without --selection");
  met_cmd->add_option("--quality", met_quality, "CSV with utterance_id,pesq,stoi");
  met_cmd->add_option("--jobs", met_jobs, "worker threads");
  met_cmd->add_option("--out", met_out, "CSV output (default stdout)");

  // correlate
  std::string cor_in, cor_out;
  auto* cor_cmd = app.add_subcommand("correlate", "Pearson r of metrics vs quality");
  cor_cmd->add_option("--metrics", cor_in, "metrics CSV")->required();
  cor_cmd->add_option("--out", cor_out, "CSV output (default stdout)");

  // wer
  std::string wer_manifest, wer_sel, wer_ref, wer_hyp, wer_level = "word", wer_out, wer_sum;
  int wer_cand = 0;
  auto* wer_cmd = app.add_subcommand("wer", "edit-distance error rates");
  wer_cmd->add_option("--manifest", wer_manifest, "manifest with transcripts");
  wer_cmd->add_option("--selection", wer_sel, "select output naming the candidate");
  wer_cmd->add_option("--candidate", wer_cand, "candidate index without --selection");
  wer_cmd->add_option("--ref", wer_ref, "reference transcripts (id<TAB>text)");
  wer_cmd->add_option("--hyp", wer_hyp, "hypothesis transcripts (id<TAB>text)");
  wer_cmd->add_option("--level", wer_level, "word|phoneme|char")->capture_default_str();
  wer_cmd->add_option("--out", wer_out, "per-utterance JSONL (default stdout)");
  wer_cmd->add_option("--summary", wer_sum, "totals JSON");

  // sweep-n
  DatasetArgs sw_data;
  EvalArgs sw_eval;
  SamplerFlags sw_sampler;
  std::vector<int> sw_n{5, 10, 20, 30, 40};
  std::string sw_out;
  auto* sw_cmd = app.add_subcommand("sweep-n", "RTF and quality against N");
  sw_data.add(sw_cmd);
  sw_eval.add(sw_cmd);
  sw_sampler.add(sw_cmd);
  sw_cmd->add_option("--n", sw_n, "N values")->delimiter(',');
  sw_cmd->add_option("--out", sw_out, "CSV output (default stdout)");

  // eval-schedule
  DatasetArgs ev_data;
  EvalArgs ev_eval;
  SamplerFlags ev_sampler;
  std::vector<std::string> ev_sched;
  std::string ev_base = "30", ev_out, ev_pu;
  auto* ev_cmd = app.add_subcommand("eval-schedule", "SNR-banded N schedules vs a baseline");
  ev_data.add(ev_cmd);
  ev_eval.add(ev_cmd);
  ev_sampler.add(ev_cmd);
  // One schedule per occurrence; CLI11 would otherwise split "[a,b,c,d]".
  ev_cmd->add_option("--schedule", ev_sched, "per-band N, e.g. [20,30,20,10]")
      ->required()
      ->allow_extra_args(false);
  ev_cmd->add_option("--baseline", ev_base, "baseline schedule")->capture_default_str();
  ev_cmd->add_option("--out", ev_out, "CSV output (default stdout)");
  ev_cmd->add_option("--per-utterance", ev_pu, "CSV of SNR, source, band and N");

  // report
  std::string rep_det, rep_wer, rep_cal, rep_out;
  std::vector<std::string> rep_sel;
  auto* rep_cmd = app.add_subcommand("report", "aggregate per-utterance outputs");
  rep_cmd->add_option("--detect", rep_det, "detect JSONL");
  rep_cmd->add_option("--select", rep_sel, "select JSONL (repeatable)");
  rep_cmd->add_option("--wer", rep_wer, "wer per-utterance JSONL");
  rep_cmd->add_option("--calibration", rep_cal, "calibrate JSON");
  rep_cmd->add_option("--out", rep_out, "JSON output (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (*sim_cmd) {
      CmdSimulate(sim_args, out);
    } else if (*emb_cmd) {
      CmdEmbed(emb_manifest, emb_out, emb_mel, emb_jobs, out);
    } else if (*det_cmd) {
      CmdDetect(det_manifest, det_tau, det_cal, det_s, det_jobs, det_out, out);
    } else if (*cal_cmd) {
      CmdCalibrate(cal_manifest, cal_s, cal_jobs, cal_out, out);
    } else if (*sel_cmd) {
      CmdSelect(sel_manifest, sel_heur, sel_method, sel_s, sel_jobs, sel_out, out);
    } else if (*met_cmd) {
      CmdMetrics(met_manifest, met_sel, met_cand, met_quality, met_jobs, met_out, out);
    } else if (*cor_cmd) {
      CmdCorrelate(cor_in, cor_out, out);
    } else if (*wer_cmd) {
      CmdWer(wer_manifest, wer_sel, wer_cand, wer_ref, wer_hyp, wer_level, wer_out,
             wer_sum, out);
    } else if (*sw_cmd) {
      CmdSweep(sw_data, sw_eval, sw_sampler, sw_n, sw_out, out);
    } else if (*ev_cmd) {
      CmdEvalSchedule(ev_data, ev_eval, ev_sampler, ev_sched, ev_base, ev_out, ev_pu, out);
    } else if (*rep_cmd) {
      CmdReport(rep_det, rep_sel, rep_wer, rep_cal, rep_out, out);
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    ErrorLine(err, "error", "usage", e.what());
    return kExitInput;
  } catch (const Sentinel& e) {
    ErrorLine(err, "sentinel", "undefined-metric", e.what());
    return kExitSentinel;
  } catch (const Error& e) {
    ErrorLine(err, "error", e.kind(), e.what());
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    ErrorLine(err, "error", "format", e.what());
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    ErrorLine(err, "error", "io", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    ErrorLine(err, "error", "runtime", e.what());
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace artifree::cli
