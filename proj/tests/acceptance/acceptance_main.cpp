// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "cli.hpp"

#include "changekit/answer_parsing.hpp"
#include "changekit/dataset_io.hpp"
#include "changekit/error.hpp"
#include "changekit/eval_harness.hpp"
#include "changekit/geometry.hpp"
#include "changekit/metrics.hpp"

#include "oracles/component_oracle.hpp"
#include "oracles/fixture.hpp"
#include "oracles/metric_oracles.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace changekit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run_cli(args, out, err);
}

std::vector<std::string> generate_args(const fs::path& corpus, const fs::path& out, const std::string& endpoint) {
  return {"generate",     "--corpus-root", corpus.string(), "--corpus-config", (corpus / "corpus.cfg").string(),
          "--output-dir", out.string(),    "--endpoint",    endpoint};
}

// --- criteria ------------------------------------------------------------------

Outcome table_counts() {
  fixture::TempDir dir;
  fixture::write_corpus(dir.path(), fixture::make_samples(7, 1));
  const auto t0 = Clock::now();
  if (run(generate_args(dir.path(), dir.path() / "out", "none")) != 0) return {false, "generate failed"};
  const double secs = seconds_since(t0);
  const auto c = count_records(read_records(dir.path() / "out" / "dataset.jsonl"));
  const bool small_ok = c.count(RecordKind::caption) == 35 && c.count(RecordKind::binary) == 7 &&
                        c.count(RecordKind::quantify) == 7 && c.count(RecordKind::localize) == 7 &&
                        c.count(RecordKind::multi_turn) == 7 && c.total == 63 && secs < 1.0;

  // Full training-split size on 20 px tiles.
  fixture::TempDir big;
  const std::size_t n = 6815;
  const auto cfg = fixture::write_corpus(big.path(), fixture::make_samples(n, 2, Split::train, 20), 20);
  const auto ds = assemble_dataset(scan_corpus(big.path(), cfg), {});
  const auto& f = ds.counts;
  const bool full_ok = f.count(RecordKind::caption) == 34075 && f.count(RecordKind::binary) == 6815 &&
                       f.count(RecordKind::quantify) == 6815 && f.count(RecordKind::localize) == 6815 &&
                       f.count(RecordKind::multi_turn) == 6815;

  std::ostringstream d;
  d << "N=7 -> " << c.count(RecordKind::caption) << "/" << c.count(RecordKind::binary) << "/"
    << c.count(RecordKind::quantify) << "/" << c.count(RecordKind::localize) << "/" << c.count(RecordKind::multi_turn)
    << " in " << secs << " s; N=6815 -> " << f.count(RecordKind::caption) << "/" << f.count(RecordKind::binary) << "/"
    << f.count(RecordKind::quantify) << "/" << f.count(RecordKind::localize) << "/"
    << f.count(RecordKind::multi_turn) << " (published total 87,195; published rows sum to 87,935)";
  return {small_ok && full_ok, d.str()};
}

Outcome components_oracle() {
  std::mt19937_64 rng(2024);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, components = 0;
  for (int g = 0; g < 1000; ++g) {
    LabelGrid grid(64, 64);
    const int density = 10 + static_cast<int>(rng() % 70);
    for (std::size_t y = 0; y < 64; ++y)
      for (std::size_t x = 0; x < 64; ++x)
        if (static_cast<int>(rng() % 100) < density) grid.set(x, y, static_cast<CategoryId>(1 + rng() % 2));
    for (CategoryId cat : {CategoryId{1}, CategoryId{2}}) {
      for (auto conn : {Connectivity::four, Connectivity::eight}) {
        const auto got = oracle::as_partition(connected_components(grid, cat, conn));
        const auto want = oracle::flood_fill_components(grid, cat, conn == Connectivity::eight);
        components += want.size();
        if (got != want) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "1000 grids x 2 categories x 2 connectivities, " << components << " components, " << mismatches
    << " mismatching partitions, " << secs << " s";
  return {mismatches == 0 && secs < 30.0, d.str()};
}

// Random convex or two-rectangle blob, checked to be one hole-free component.
LabelGrid random_blob(std::mt19937_64& rng) {
  const std::size_t size = 256;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    LabelGrid g(size, size);
    if (rng() % 2 == 0) {
      const double cx = 40 + u(rng) * 176, cy = 40 + u(rng) * 176;
      const double a = 4 + u(rng) * 36, b = 4 + u(rng) * 36, th = u(rng) * M_PI;
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
          const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
          const double p = (dx * std::cos(th) + dy * std::sin(th)) / a, q = (-dx * std::sin(th) + dy * std::cos(th)) / b;
          if (p * p + q * q <= 1.0) g.set(x, y, 2);
        }
    } else {
      const std::size_t x0 = 20 + rng() % 150, y0 = 20 + rng() % 150;
      const std::size_t w0 = 3 + rng() % 60, h0 = 3 + rng() % 60;
      const std::size_t x1 = x0 + rng() % w0, y1 = y0 + rng() % h0, w1 = 3 + rng() % 60, h1 = 3 + rng() % 60;
      for (std::size_t y = y0; y < y0 + h0; ++y)
        for (std::size_t x = x0; x < x0 + w0; ++x) g.set(x, y, 1);
      for (std::size_t y = y1; y < std::min(size, y1 + h1); ++y)
        for (std::size_t x = x1; x < std::min(size, x1 + w1); ++x) g.set(x, y, 1);
    }
    const auto cat = g.has_change() ? *std::find_if(g.labels().begin(), g.labels().end(), [](auto v) { return v != 0; })
                                    : CategoryId{0};
    if (cat == 0 || count_objects(g, cat) != 1) continue;
    // Hole-free: the four-connected background touching the border is all of it.
    std::vector<char> seen(size * size, 0);
    std::deque<std::pair<std::size_t, std::size_t>> queue;
    auto push = [&](std::size_t x, std::size_t y) {
      if (g.at(x, y) == 0 && !seen[y * size + x]) {
        seen[y * size + x] = 1;
        queue.emplace_back(x, y);
      }
    };
    for (std::size_t i = 0; i < size; ++i) {
      push(i, 0);
      push(i, size - 1);
      push(0, i);
      push(size - 1, i);
    }
    std::size_t reached = 0;
    while (!queue.empty()) {
      const auto [x, y] = queue.front();
      queue.pop_front();
      ++reached;
      if (x > 0) push(x - 1, y);
      if (x + 1 < size) push(x + 1, y);
      if (y > 0) push(x, y - 1);
      if (y + 1 < size) push(x, y + 1);
    }
    const auto background = static_cast<std::size_t>(std::count(g.labels().begin(), g.labels().end(), 0));
    if (reached == background) return g;
  }
}

Outcome polygon_pipeline() {
  std::mt19937_64 rng(256);
  const auto t0 = Clock::now();
  const double eps = default_epsilon(256, 256);
  std::size_t exact = 0, bound_violations = 0;
  double iou_sum = 0, worst_exact = 1.0;
  for (int i = 0; i < 200; ++i) {
    const auto g = random_blob(rng);
    const auto cat = *std::find_if(g.labels().begin(), g.labels().end(), [](auto v) { return v != 0; });
    const auto comp = connected_components(g, cat)[0];
    const auto contour = trace_contour(comp, 256, 256);

    const auto p0 = normalize(simplify(contour, 0.0), 256, 256, cat);
    const double iou0 = polygon_raster_iou(p0, g, cat);
    worst_exact = std::min(worst_exact, iou0);
    exact += iou0 == 1.0;

    const auto simplified = simplify(contour, eps);
    for (const auto& v : contour.vertices)
      if (point_ring_distance(v, simplified.vertices) > eps + 1e-9) ++bound_violations;
    iou_sum += polygon_raster_iou(normalize(simplified, 256, 256, cat), g, cat);
  }
  const double secs = seconds_since(t0);
  const double mean_iou = iou_sum / 200.0;
  std::ostringstream d;
  d << exact << "/200 exact at eps=0 (worst " << worst_exact << "); mean IoU " << mean_iou << " at eps=" << eps
    << "; " << bound_violations << " removed vertices beyond eps; " << secs << " s";
  return {exact == 200 && mean_iou >= 0.7 && bound_violations == 0 && secs < 60.0, d.str()};
}

Outcome serialization_round_trip() {
  std::mt19937_64 rng(10000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const int precision = 1 + static_cast<int>(rng() % 6);
    NormalizedPolygon p;
    p.category = 1;
    // Convex-ish rings around a random center so few vertices merge.
    const double cx = 0.2 + 0.6 * u(rng), cy = 0.2 + 0.6 * u(rng), r = 0.05 + 0.15 * u(rng);
    const int n = 3 + static_cast<int>(rng() % 10);
    for (int k = 0; k < n; ++k) {
      const double a = 2 * M_PI * (k + u(rng) * 0.5) / n;
      p.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    const auto q = quantize(p, precision);
    const auto back = parse_polygon(serialize_polygon(p, precision));
    const double tol = std::pow(10.0, -precision);
    bool good = back.vertices.size() == q.vertices.size();
    for (std::size_t k = 0; good && k < q.vertices.size(); ++k)
      good = std::abs(back.vertices[k].x - q.vertices[k].x) <= tol && std::abs(back.vertices[k].y - q.vertices[k].y) <= tol;
    // Against the unquantized input: every vertex is within a quantum of an input vertex, or, when the
    // ring collapsed to its snapped bounding box, each corner is within a quantum of that box.
    double x0 = 1, y0 = 1, x1 = 0, y1 = 0;
    for (const auto& w : p.vertices) {
      x0 = std::min(x0, w.x), y0 = std::min(y0, w.y), x1 = std::max(x1, w.x), y1 = std::max(y1, w.y);
    }
    bool on_vertices = true, on_box = back.vertices.size() == 4;
    for (const auto& v : back.vertices) {
      bool near = false;
      for (const auto& w : p.vertices) near |= std::abs(v.x - w.x) <= tol && std::abs(v.y - w.y) <= tol;
      on_vertices &= near;
      on_box &= (std::abs(v.x - x0) <= tol || std::abs(v.x - x1) <= tol) &&
                (std::abs(v.y - y0) <= tol || std::abs(v.y - y1) <= tol);
    }
    good &= on_vertices || on_box;
    ok += good;
  }
  return {ok == 10000, std::to_string(ok) + "/10000 polygons round-trip within 10^-precision"};
}

EvalPair to_pair(const oracle::Pair& p, std::size_t i) {
  EvalPair e;
  e.sample_id = std::to_string(i);
  e.hypothesis.tokens = p.hyp;
  for (const auto& r : p.refs) e.references.push_back(TokenSequence{r});
  return e;
}

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  double worst[4] = {0, 0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto oc = oracle::random_corpus(seed * 7919, 20);
    std::vector<EvalPair> ec;
    for (std::size_t i = 0; i < oc.size(); ++i) ec.push_back(to_pair(oc[i], i));
    worst[0] = std::max(worst[0], std::abs(bleu1(ec) - oracle::bleu1(oc)));
    worst[1] = std::max(worst[1], std::abs(rouge_l(ec) - oracle::rouge_l(oc)));
    worst[2] = std::max(worst[2], std::abs(meteor(ec) - oracle::meteor(oc)));
    worst[3] = std::max(worst[3], std::abs(cider_d(ec) - oracle::cider_d(oc)));
  }
  const std::vector<long long> p{2, 3}, g{2, 5};
  const bool mae_ok = mae(p, g) == 1.0 && mae(g, g) == 0.0;
  const auto b = binary_scores({true, false, false, true}, {true, true, false, false});
  const auto all = binary_scores({true, false, true}, {true, false, true});
  const bool bin_ok = b.accuracy == 0.5 && b.recall == 0.5 && all.accuracy == 1.0 && all.recall == 1.0;
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "max |diff| BLEU-1 " << worst[0] << ", ROUGE-L " << worst[1] << ", METEOR " << worst[2] << ", CIDEr-D "
    << worst[3] << " over 50 corpora; MAE " << (mae_ok ? "exact" : "WRONG") << ", accuracy/recall "
    << (bin_ok ? "exact" : "WRONG") << "; " << secs << " s";
  const bool close = worst[0] <= 1e-6 && worst[1] <= 1e-6 && worst[2] <= 1e-6 && worst[3] <= 1e-6;
  return {close && mae_ok && bin_ok && secs < 60.0, d.str()};
}

EvalOptions quiet() {
  EvalOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  o.endpoint.max_retries = 0;
  return o;
}

Outcome perfect_model() {
  fixture::TempDir dir;
  const auto samples = fixture::make_samples(25, 99, Split::test);
  const auto manifest = scan_corpus(dir.path(), fixture::write_corpus(dir.path(), samples));
  const auto opts = quiet();
  OracleEndpoint ep(manifest, opts);
  const auto cap = evaluate_task(ep, manifest, EvalTask::caption_cot, opts);
  const auto bin = evaluate_task(ep, manifest, EvalTask::binary, opts);
  const auto q = evaluate_task(ep, manifest, EvalTask::quantify, opts);
  const auto loc = evaluate_task(ep, manifest, EvalTask::localize, opts);

  std::vector<oracle::Pair> oc;
  for (const auto& s : manifest.samples) {
    oracle::Pair p;
    p.hyp = tokenize(s.captions[0]).tokens;
    for (const auto& c : s.captions) p.refs.push_back(tokenize(c).tokens);
    oc.push_back(p);
  }
  const double cider_max = oracle::cider_d(oc);
  bool mae_zero = q.mae.size() == 2;
  for (const auto& [k, v] : q.mae) mae_zero &= v == 0.0;
  const bool ok = cap.bleu1 == 1.0 && cap.meteor == 1.0 && cap.rouge_l == 1.0 && cap.cider_d &&
                  std::abs(*cap.cider_d - cider_max) <= 1e-6 && bin.accuracy == 1.0 && bin.recall == 1.0 && mae_zero &&
                  loc.mean_iou == 1.0;
  std::ostringstream d;
  d << "BLEU-1 " << cap.bleu1.value_or(-1) << ", METEOR " << cap.meteor.value_or(-1) << ", ROUGE-L "
    << cap.rouge_l.value_or(-1) << ", CIDEr-D " << cap.cider_d.value_or(-1) << " (oracle " << cider_max
    << "), accuracy " << bin.accuracy.value_or(-1) << ", recall " << bin.recall.value_or(-1) << ", MAE "
    << (mae_zero ? "0" : "nonzero") << ", mean IoU " << loc.mean_iou.value_or(-1);
  return {ok, d.str()};
}

Outcome cot_protocol() {
  fixture::TempDir dir;
  const auto samples = fixture::make_samples(6, 5, Split::test);
  const auto manifest = scan_corpus(dir.path(), fixture::write_corpus(dir.path(), samples));
  const auto opts = quiet();
  const auto& palette = manifest.palette;

  ScriptedEndpoint scripted({std::string("Yes, there are changes."),
                             std::string("Two buildings were built and no roads changed."),
                             std::string("two buildings are built near the road .")});
  const auto t = run_cot_session(scripted, manifest.samples[0], opts, palette);
  Transcript expected;
  expected.sample_id = manifest.samples[0].sample_id;
  expected.task = EvalTask::caption_cot;
  expected.rounds = {{opts.prompts.binary, "Yes, there are changes."},
                     {expand_categories(opts.prompts.objects, palette), "Two buildings were built and no roads changed."},
                     {opts.prompts.caption, "two buildings are built near the road ."}};
  const bool transcript_ok = t == expected;

  OracleEndpoint oracle_ep(manifest, opts);
  const auto path = dir.path() / "cot.jsonl";
  const auto live = evaluate_task(oracle_ep, manifest, EvalTask::caption_cot, opts, path);
  const auto replay = score_transcripts(EvalTask::caption_cot, read_transcripts(path), manifest, opts);
  const bool rescore_ok = live.to_json().dump() == replay.to_json().dump();

  ScriptedEndpoint a({std::string("x"), std::string("y"), std::string("z")}), b({std::string("x")});
  run_session(a, manifest.samples[0], EvalTask::caption_cot, opts, palette);
  run_session(b, manifest.samples[0], EvalTask::caption_direct, opts, palette);
  std::vector<std::string> cot_stream, direct_stream;
  for (const auto& r : a.requests()) cot_stream.push_back(r.messages.back().content);
  for (const auto& r : b.requests()) direct_stream.push_back(r.messages.back().content);
  const bool streams_ok = cot_stream.size() == 3 && direct_stream.size() == 1 && cot_stream != direct_stream &&
                          direct_stream[0] == opts.prompts.caption && cot_stream[0] == opts.prompts.binary;

  std::ostringstream d;
  d << "transcript " << (transcript_ok ? "exact" : "DIFFERS") << ", rescore " << (rescore_ok ? "identical" : "DIFFERS")
    << ", cot stream " << cot_stream.size() << " prompts vs direct " << direct_stream.size();
  return {transcript_ok && rescore_ok && streams_ok, d.str()};
}

Outcome determinism() {
  fixture::TempDir dir;
  const auto corpus = dir.path() / "corpus";
  fs::create_directories(corpus);
  fixture::write_corpus(corpus, fixture::make_samples(12, 42));
  auto a = generate_args(corpus, dir.path() / "a", "stub");
  auto b = generate_args(corpus, dir.path() / "b", "stub");
  b.insert(b.end(), {"--jobs", "4"});
  if (run(a) != 0 || run(b) != 0) return {false, "generate failed"};
  const auto x = slurp(dir.path() / "a" / "dataset.jsonl"), y = slurp(dir.path() / "b" / "dataset.jsonl");
  const auto gpt = count_records(read_records(dir.path() / "a" / "dataset.jsonl")).gpt_assisted;
  std::ostringstream d;
  d << x.size() << " bytes, " << gpt << " stub GPT records, runs " << (x == y ? "byte-identical" : "DIFFER");
  return {x == y && gpt > 0, d.str()};
}

Outcome integrity() {
  fixture::TempDir dir;
  const auto corpus = dir.path() / "corpus";
  fs::create_directories(corpus);
  const auto samples = fixture::make_samples(40, 4040);
  const auto cfg = fixture::write_corpus(corpus, samples);
  const auto out = dir.path() / "out";
  if (run(generate_args(corpus, out, "stub")) != 0) return {false, "generate failed"};
  const bool valid = run({"validate", (out / "dataset.jsonl").string()}) == 0;

  const auto manifest = scan_corpus(corpus, cfg);
  std::map<std::string, bool> changed;
  for (const auto& s : manifest.samples) changed[s.sample_id] = load_change_map(s, manifest).has_change();

  std::size_t polys = 0, bad_polys = 0, binary = 0, binary_ok = 0;
  for (const auto& r : read_records(out / "dataset.jsonl")) {
    for (const auto& t : r.turns) {
      for (const auto& text : extract_polygon_texts(t.text)) {
        ++polys;
        try {
          parse_polygon(text);
        } catch (const Error&) {
          ++bad_polys;
        }
      }
    }
    if (r.kind == RecordKind::binary || r.kind == RecordKind::multi_turn) {
      ++binary;
      binary_ok += (r.turns[1].text == "yes") == changed.at(r.sample_id);
    }
  }
  std::ostringstream d;
  d << "validate " << (valid ? "clean" : "FAILED") << ", " << polys - bad_polys << "/" << polys
    << " polygons re-parse, " << binary_ok << "/" << binary << " binary answers match the change maps";
  return {valid && bad_polys == 0 && polys > 0 && binary_ok == binary, d.str()};
}

} // namespace

int main() {
  report("table1-counts", table_counts);
  report("components-oracle", components_oracle);
  report("polygon-pipeline", polygon_pipeline);
  report("serialization-round-trip", serialization_round_trip);
  report("metric-oracles", metric_oracles);
  report("perfect-model", perfect_model);
  report("cot-protocol", cot_protocol);
  report("determinism", determinism);
  report("dataset-integrity", integrity);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
