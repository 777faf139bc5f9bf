#include "xrate/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "xrate/blockmap.hpp"
#include "xrate/bundles.hpp"
#include "xrate/ddg.hpp"
#include "xrate/ergodic.hpp"
#include "xrate/generators.hpp"
#include "xrate/levinkautz.hpp"
#include "xrate/measures.hpp"
#include "xrate/selftest.hpp"

namespace xrate::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InvalidInput(std::string("bad ") + what + " '" + text + "'");
  }
  return v;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw InvalidInput("--seeds expects a..b, got '" + text + "'");
  const auto a = parse_u64(text.substr(0, dots), "seed");
  const auto b = parse_u64(text.substr(dots + 2), "seed");
  if (b < a || b - a >= 4096) throw InvalidInput("--seeds range must satisfy a <= b < a + 4096");
  std::vector<std::uint64_t> out;
  for (auto s = a; s <= b; ++s) out.push_back(s);
  return out;
}

std::vector<std::uint64_t> parse_schedule(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_u64(item, "schedule entry"));
  if (out.empty()) throw InvalidInput("empty schedule");
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_file(const std::string& s) {
  std::error_code ec;
  return !s.empty() && fs::is_regular_file(s, ec);
}

Measure load_measure(const std::string& config) {
  if (is_file(config)) return parse_measure(read_text_file(config));
  return parse_measure(config);
}

struct GenSpec {
  Generator gen;
  std::optional<BlockMap> block;
  std::optional<DdgTree> tree;
};

GenSpec load_generator(const std::string& spec) {
  GenSpec g;
  if (spec == "vn") {
    g.block = von_neumann();
    g.gen = g.block->generator("vn");
  } else if (spec == "identity") {
    g.gen = identity_generator();
  } else if (spec == "dup") {
    g.gen = duplication_generator();
  } else if (spec == "oscillating") {
    g.gen = oscillating_generator();
  } else if (spec.rfind("block:", 0) == 0) {
    g.block = read_block_map_file(spec.substr(6));
    g.gen = g.block->generator(spec);
  } else if (spec.rfind("peres:", 0) == 0) {
    const auto k = parse_u64(spec.substr(6), "Peres depth");
    const PeresExtractor p = peres(k);
    g.gen.name = spec;
    g.gen.eval = p.as_map();
  } else if (spec.rfind("ddg:", 0) == 0) {
    g.tree = parse_tree(spec.substr(4));
    g.gen = ddg_generator(*g.tree);
    g.gen.name = spec;
  } else {
    throw InvalidInput("unknown generator '" + spec + "' (vn, identity, dup, oscillating, block:<file>, peres:k, ddg:<tree>)");
  }
  return g;
}

BitStream open_stream(const std::string& in, const Measure& source, std::uint64_t seed) {
  if (in.empty()) return measure_stream(source, seed);
  if (is_file(in)) return BitStream::from_bits(read_bitstream_file(in), "file:" + in);
  return measure_stream(source, parse_u64(in, "--in seed or file"));
}

fs::path per_seed_path(const std::string& path, std::uint64_t seed, bool multi) {
  if (!multi) return path;
  return path + "." + std::to_string(seed);
}

json rational_json(const Rational& q) { return to_string(q); }

json rate_json(const RateReport& r) {
  json j;
  j["generator"] = r.generator;
  j["measure"] = r.measure;
  j["schedule"] = r.schedule;
  json avg = json::array();
  for (const auto& p : r.avg_by_n) {
    json e;
    e["n"] = p.n;
    e["exact"] = p.exact ? rational_json(*p.exact) : json(nullptr);
    e["value"] = p.value;
    e["samples"] = p.samples;
    avg.push_back(e);
  }
  j["avg_by_n"] = avg;
  json oi = json::array();
  for (const auto& p : r.oi_trace) oi.push_back({{"n", p.n}, {"value", to_string(p.value)}, {"float", to_double(p.value)}});
  j["oi_trace"] = oi;
  j["limsup_est"] = r.limsup_est;
  j["liminf_est"] = r.liminf_est;
  j["theoretical"] = r.theoretical ? json(*r.theoretical) : json(nullptr);
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  j["stream_id"] = r.stream_id;
  return j;
}

json checkpoints_json(const std::vector<LkCheckpoint>& cps) {
  json a = json::array();
  for (const auto& c : cps) {
    a.push_back({{"n", c.n}, {"g", c.g}, {"mu_mass", to_string(c.mu_mass)}, {"nu_mass", to_string(c.nu_mass)}});
  }
  return a;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// One subcommand's work, run once per seed.
struct Job {
  std::string command;
  std::function<json(std::uint64_t)> body;
  std::function<std::string(const json&)> text;
  std::function<std::string(const json&)> csv;
  std::string default_format = "json";
  /// Runs flagged {"passed": false} exit with a contract failure.
  bool pass_fail = false;
};

std::string trace_csv(const json& j, const char* trace_key) {
  std::string out = "n,value\n";
  for (const auto& p : j.at(trace_key)) {
    const double v = p.contains("float") ? p["float"].get<double>() : p["value"].get<double>();
    out += std::to_string(p["n"].get<std::uint64_t>()) + "," + fmt_double(v) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

struct RateArgs {
  std::string gen;
  std::string measure;
  std::string in;
  std::string schedule;
  std::uint64_t n = 0;
  bool exact = false;
  std::uint64_t samples = 1000;
};

Job rate_job(const RateArgs& a) {
  Job job;
  job.command = "rate";
  job.default_format = a.exact ? "text" : "json";
  job.body = [a](std::uint64_t seed) {
    const GenSpec g = load_generator(a.gen);
    const Measure mu = load_measure(a.measure);
    json j;
    if (a.exact) {
      j["generator"] = g.gen.name;
      j["measure"] = mu.config();
      if (a.n == 0 && a.schedule.empty()) {
        if (!g.block) throw InvalidInput("an exact rate without --n needs a block-map generator");
        const Rational r = block_rate(*g.block, mu);
        j["rate"] = to_string(r);
        j["value"] = to_double(r);
        return j;
      }
      const auto schedule = a.schedule.empty() ? std::vector<std::uint64_t>{a.n} : parse_schedule(a.schedule);
      json avg = json::array();
      for (const auto n : schedule) {
        const Rational v = avg_oi(g.gen, mu, n);
        avg.push_back({{"n", n}, {"exact", to_string(v)}, {"value", to_double(v)}});
      }
      j["avg_by_n"] = avg;
      return j;
    }
    std::vector<std::uint64_t> schedule;
    if (!a.schedule.empty()) {
      schedule = parse_schedule(a.schedule);
    } else {
      schedule = geometric_schedule(a.n == 0 ? 1024 : a.n);
    }
    BitStream x = open_stream(a.in, mu, seed);
    RateOptions opt;
    opt.mc_samples = a.samples;
    opt.mc_seed = seed;
    RateReport r = rate_report(g.gen, mu, schedule, &x, opt);
    if (g.block) {
      const auto step = mu.step();
      if (step && (*step == 1 || *step == g.block->n()) && mu.is_positive()) r.theoretical = to_double(block_rate(*g.block, mu));
    } else if (g.tree && mu.kind() == MeasureKind::lebesgue) {
      r.theoretical = 1.0 / to_double(avg_rt(*g.tree).value);
    }
    return rate_json(r);
  };
  job.text = [](const json& j) {
    if (j.contains("rate")) return j["rate"].get<std::string>() + "\n";
    if (!j.contains("avg_by_n")) throw InvalidInput("text output is only available with --exact");
    const auto& avg = j["avg_by_n"];
    if (avg.size() == 1) return avg[0]["exact"].get<std::string>() + "\n";
    std::string out;
    for (const auto& p : avg) out += std::to_string(p["n"].get<std::uint64_t>()) + " " + p["exact"].get<std::string>() + "\n";
    return out;
  };
  job.csv = [](const json& j) {
    if (j.contains("oi_trace") && !j["oi_trace"].empty()) return trace_csv(j, "oi_trace");
    if (j.contains("avg_by_n")) return trace_csv(j, "avg_by_n");
    throw InvalidInput("no trace to write as CSV");
  };
  return job;
}

struct ConvertArgs {
  std::string from;
  std::string to;
  std::string in;
  std::uint64_t out_bits = 1000;
  std::uint64_t cap = 100000;
  std::string trace;
  bool kautz = false;
  bool roundtrip = false;
};

Job convert_job(const ConvertArgs& a, bool multi) {
  Job job;
  job.command = "convert";
  job.body = [a, multi](std::uint64_t seed) {
    const Measure mu = load_measure(a.from);
    const Measure nu = load_measure(a.to);
    BitStream x = open_stream(a.in, mu, seed);
    const BitStream origin = x;
    LkResult r;
    try {
      r = lk_convert(mu, nu, x, a.out_bits, a.cap);
    } catch (const ConversionStalled& e) {
      if (!a.trace.empty()) write_json_file(per_seed_path(a.trace, seed, multi), checkpoints_json(e.partial.checkpoints));
      throw;
    }
    if (!a.trace.empty()) write_json_file(per_seed_path(a.trace, seed, multi), checkpoints_json(r.checkpoints));
    json j;
    j["from"] = mu.config();
    j["to"] = nu.config();
    j["stream_id"] = x.id();
    j["out_bits"] = r.output.size();
    j["consumed"] = r.consumed;
    j["g"] = r.g_trace.back();
    j["g_over_n"] = static_cast<double>(r.g_trace.back()) / static_cast<double>(r.consumed);
    const double h_nu = entropy_rate(nu);
    j["theoretical"] = h_nu > 0 ? json(entropy_rate(mu) / h_nu) : json(nullptr);
    j["output"] = r.output.to_string();
    j["checkpoints"] = checkpoints_json(r.checkpoints);
    if (a.kautz) {
      BitStream y = origin;
      y.reset();
      const KautzReport k = kautz_check(mu, nu, y, r.consumed);
      j["kautz"] = {{"horizon", k.horizon},         {"delta", to_string(k.delta)},
                    {"violations", k.violations},   {"witnesses", k.witnesses},
                    {"largest_witness_gap", k.largest_witness_gap}, {"warning", k.warning}};
    }
    if (a.roundtrip) {
      BitStream y = origin;
      y.reset();
      const RoundTrip rt = lk_roundtrip(mu, nu, y, a.out_bits, a.cap, a.cap);
      j["roundtrip"] = {{"agreement", rt.agreement}, {"forward_bits", rt.forward_bits}, {"backward_bits", rt.backward_bits}};
    }
    return j;
  };
  job.csv = [](const json& j) {
    std::string out = "n,value\n";
    for (const auto& c : j["checkpoints"]) {
      const double v = static_cast<double>(c["g"].get<std::uint64_t>()) / static_cast<double>(c["n"].get<std::uint64_t>());
      out += std::to_string(c["n"].get<std::uint64_t>()) + "," + fmt_double(v) + "\n";
    }
    return out;
  };
  return job;
}

struct EntropyArgs {
  std::string measure;
  std::string in;
  std::uint64_t n = 0;
};

Job entropy_job(const EntropyArgs& a) {
  Job job;
  job.command = "entropy";
  job.default_format = "text";
  job.body = [a](std::uint64_t seed) {
    const Measure mu = load_measure(a.measure);
    json j;
    j["measure"] = mu.config();
    j["entropy_rate"] = entropy_rate(mu);
    const auto delta = positivity_delta(mu);
    j["positivity_delta"] = delta ? json(to_string(*delta)) : json(nullptr);
    if (a.n > 0) {
      BitStream x = open_stream(a.in, mu, seed);
      j["n"] = a.n;
      j["smb_estimate"] = smb_entropy_estimate(mu, x, a.n);
      j["stream_id"] = x.id();
    }
    return j;
  };
  job.text = [](const json& j) {
    std::string out = fmt_double(j["entropy_rate"].get<double>()) + "\n";
    if (j.contains("smb_estimate")) out += fmt_double(j["smb_estimate"].get<double>()) + "\n";
    return out;
  };
  return job;
}

struct DdgArgs {
  std::string tree;
  std::string tail_tol = "1/1000000000";
  std::uint64_t level = 0;
  std::uint64_t n = 0;
  std::string in;
  std::uint64_t samples = 0;
  std::uint64_t mc_n = 10000;
};

Job ddg_job(const DdgArgs& a) {
  Job job;
  job.command = "ddg";
  job.body = [a](std::uint64_t seed) {
    const Rational tol = parse_rational(a.tail_tol);
    const DdgTree tree = parse_tree(a.tree, tol);
    json j;
    j["tree"] = a.tree;
    j["finite"] = tree.is_finite();
    j["labels"] = tree.labels();
    json dist = json::array();
    for (const auto& p : tree.distribution()) dist.push_back(to_string(p));
    j["distribution"] = dist;
    const AvgRt rt = a.level > 0 ? avg_rt(tree, a.level) : avg_rt(tree);
    j["avg_rt"] = {{"value", to_string(rt.value)},
                   {"float", to_double(rt.value)},
                   {"tail_bound", to_string(rt.tail_bound)},
                   {"level", rt.level},
                   {"exact", rt.exact}};
    const double rate = 1.0 / to_double(rt.value);
    j["rate"] = rate;
    if (a.n > 0) {
      BitStream x = open_stream(a.in, Measure::lebesgue(), seed);
      std::vector<std::uint64_t> counts(tree.alphabet_size(), 0);
      DdgTree::Cursor cursor;
      std::uint64_t symbols = 0;
      std::uint64_t read = 0;
      for (; read < a.n; ++read) {
        const auto bit = x.next();
        if (!bit) break;
        if (auto label = tree.step(cursor, *bit)) {
          ++counts[*label];
          ++symbols;
        }
      }
      json freq;
      for (std::size_t i = 0; i < counts.size(); ++i) freq[tree.labels()[i]] = counts[i];
      j["extraction"] = {{"stream_id", x.id()},
                         {"input_bits", read},
                         {"symbols", symbols},
                         {"symbols_per_bit", static_cast<double>(symbols) / static_cast<double>(read)},
                         {"label_counts", freq}};
    }
    if (a.samples > 0) {
      j["monte_carlo_avg"] = {{"n", a.mc_n},
                              {"samples", a.samples},
                              {"seed", seed},
                              {"value", monte_carlo_avg(ddg_generator(tree).eval, Measure::lebesgue(), a.mc_n, a.samples, seed)}};
    }
    return j;
  };
  return job;
}

struct ExtractArgs {
  std::string gen;
  std::string measure = "lebesgue";
  std::string in;
  std::uint64_t n = 1024;
  std::uint64_t out_bits = 0;
  std::string emit;
};

Job extract_job(const ExtractArgs& a, bool multi) {
  Job job;
  job.command = "extract";
  job.body = [a, multi](std::uint64_t seed) {
    const GenSpec g = load_generator(a.gen);
    const Measure mu = load_measure(a.measure);
    BitStream x = open_stream(a.in, mu, seed);
    json j;
    j["generator"] = g.gen.name;
    j["source"] = mu.config();
    j["stream_id"] = x.id();
    if (a.out_bits > 0) {
      BitStream y = x;
      j["use"] = use_function(g.gen, y, a.out_bits, std::max<std::uint64_t>(a.n, 1));
    }
    const BitString input = x.prefix(a.n);
    if (input.empty()) throw InvalidInput("no input bits to extract from");
    const BitString output = g.gen(input);
    j["input_bits"] = input.size();
    j["output_bits"] = output.size();
    const Rational oi = make_rational(static_cast<long>(output.size()), static_cast<long>(input.size()));
    j["oi"] = to_string(oi);
    j["oi_value"] = to_double(oi);
    if (!a.emit.empty()) write_bitstream_file(per_seed_path(a.emit, seed, multi), output);
    return j;
  };
  return job;
}

// ---------------------------------------------------------------------------

json check_entry(const std::string& name, bool passed, json detail) {
  json e;
  e["check"] = name;
  e["passed"] = passed;
  e["detail"] = std::move(detail);
  return e;
}

json n_shift_mixing_check() {
  const Measure mu = bundled_step2();
  const ShiftSpec shift = ShiftSpec::n_shift(2);
  std::uint64_t pairs = 0;
  std::uint64_t failures = 0;
  std::size_t worst_onset = 0;
  for (std::size_t ls = 0; ls <= 5; ++ls) {
    for (std::size_t lt = 0; lt <= 5; ++lt) {
      for (const auto& sigma : all_strings(ls)) {
        for (const auto& tau : all_strings(lt)) {
          ++pairs;
          const auto vals = mixing_average(shift, mu, sigma, tau, kMaxMixingSteps);
          const Rational want = cylinder_mass(mu, sigma) * cylinder_mass(mu, tau);
          const std::size_t threshold = (tau.size() + 1) / 2 + 1;
          std::size_t onset = vals.size();
          while (onset > 0 && vals[onset - 1] == want) --onset;
          worst_onset = std::max(worst_onset, onset);
          if (onset > threshold) ++failures;
        }
      }
    }
  }
  return check_entry("2-shift mixing, 2-step Bernoulli", failures == 0,
                     {{"pairs", pairs}, {"failures", failures}, {"latest_onset", worst_onset}});
}

json tree_shift_mixing_check() {
  const DdgTree tree = bundled_three_leaf_tree();
  const ShiftSpec shift = ShiftSpec::tree_shift(tree);
  const Measure lambda = Measure::lebesgue();
  std::uint64_t pairs = 0;
  std::uint64_t failures = 0;
  std::uint64_t first_step_mismatches = 0;
  for (std::size_t ls = 0; ls <= 5; ++ls) {
    for (std::size_t lt = 0; lt <= 5; ++lt) {
      for (const auto& sigma : all_strings(ls)) {
        for (const auto& tau : all_strings(lt)) {
          ++pairs;
          const auto vals = mixing_average(shift, lambda, sigma, tau, kMaxMixingSteps);
          const Rational want = pow2_inv(ls + lt);
          if (vals[1] != want) ++first_step_mismatches;
          for (std::size_t i = mixing_threshold(shift, tau); i < vals.size(); ++i) {
            if (vals[i] != want) {
              ++failures;
              break;
            }
          }
        }
      }
    }
  }
  return check_entry("tree-shift mixing, Lebesgue", failures == 0,
                     {{"pairs", pairs},
                      {"failures", failures},
                      {"threshold", "ceil(|tau| / shortest terminal length)"},
                      {"pairs_not_mixed_after_one_step", first_step_mismatches}});
}

Job ergo_job(std::uint64_t steps) {
  Job job;
  job.command = "ergo-check";
  job.pass_fail = true;
  job.body = [steps](std::uint64_t seed) {
    json checks = json::array();
    checks.push_back(n_shift_mixing_check());
    checks.push_back(tree_shift_mixing_check());

    const BlockMap vn = von_neumann();
    for (const auto& mu : {Measure::bernoulli(make_rational(1, 4)), bundled_step2()}) {
      const double got = birkhoff_average(ShiftSpec::n_shift(2), block_oi_observable(vn), measure_stream(mu, seed), steps);
      const double want = to_double(block_rate(vn, mu));
      checks.push_back(check_entry("Birkhoff 2-shift, von Neumann block OI, " + mu.config(), std::abs(got - want) <= 0.01,
                                   {{"average", got}, {"target", want}, {"steps", steps}}));
    }
    const DdgTree tree = bundled_three_leaf_tree();
    const double got = birkhoff_average(ShiftSpec::tree_shift(tree), block_length_observable(tree),
                                        measure_stream(Measure::lebesgue(), seed), steps);
    const double want = to_double(avg_rt(tree).value);
    checks.push_back(check_entry("Birkhoff tree-shift, block length", std::abs(got - want) <= 0.01 * want,
                                 {{"average", got}, {"target", want}, {"steps", steps}}));
    const double c = birkhoff_average(ShiftSpec::n_shift(1), constant_observable(0.375),
                                      measure_stream(Measure::lebesgue(), seed), steps);
    checks.push_back(check_entry("Birkhoff constant observable", c == 0.375, {{"average", c}}));

    bool all = true;
    for (const auto& e : checks) all = all && e["passed"].get<bool>();
    json j;
    j["checks"] = checks;
    j["passed"] = all;
    return j;
  };
  return job;
}

Job selftest_job() {
  Job job;
  job.command = "selftest";
  job.pass_fail = true;
  job.body = [](std::uint64_t) {
    json checks = json::array();
    bool all = true;
    for (const auto& c : run_selftest()) {
      checks.push_back({{"module", c.module}, {"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      all = all && c.passed;
    }
    json j;
    j["checks"] = checks;
    j["passed"] = all;
    return j;
  };
  return job;
}

// ---------------------------------------------------------------------------

struct Common {
  std::uint64_t seed = 1;
  std::string seeds;
  std::string out;
  std::string format;
  bool no_timestamp = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "PRNG seed");
  sub->add_option("--seeds", c.seeds, "seed range a..b, run in parallel");
  sub->add_option("--out", c.out, "write results to this file");
  sub->add_option("--format", c.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp");
}

std::vector<json> run_seeds(const Job& job, const std::vector<std::uint64_t>& seeds) {
  std::vector<json> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = job.body(seeds[i]);
        results[i]["seed"] = seeds[i];
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, seeds.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

int execute(const Job& job, const Common& c, const std::vector<std::string>& args, std::ostream& out) {
  const bool multi = !c.seeds.empty();
  const std::vector<std::uint64_t> seeds = multi ? parse_seed_range(c.seeds) : std::vector<std::uint64_t>{c.seed};
  const std::string format = c.format.empty() ? job.default_format : c.format;
  if (format == "text" && !job.text) throw InvalidInput(job.command + " has no text output; use --format json");
  if (format == "csv" && !job.csv) throw InvalidInput(job.command + " has no CSV trace output");

  std::vector<json> runs = run_seeds(job, seeds);
  bool passed = true;
  for (const auto& r : runs) passed = passed && (!job.pass_fail || r.value("passed", false));

  std::string rendered;
  if (format == "json") {
    json doc;
    doc["provenance"] = {{"tool", "xrate"}, {"version", kVersion}, {"command", job.command}, {"argv", args}};
    if (!c.no_timestamp) doc["provenance"]["timestamp"] = timestamp_utc();
    if (multi) {
      doc["runs"] = runs;
    } else {
      for (auto& [k, v] : runs.front().items()) doc[k] = v;
    }
    rendered = doc.dump(2) + "\n";
  } else {
    for (const auto& r : runs) {
      if (multi && format == "text") rendered += "seed " + std::to_string(r["seed"].get<std::uint64_t>()) + ": ";
      rendered += format == "text" ? job.text(r) : job.csv(r);
    }
  }
  if (c.out.empty()) {
    out << rendered;
  } else {
    std::ofstream f(c.out, std::ios::trunc);
    if (!f) throw InvalidInput("cannot write " + c.out);
    f << rendered;
  }
  return passed ? kOk : kContractFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact extraction-rate and measure-conversion toolkit", "xrate"};
  app.require_subcommand(1);

  Common common;
  RateArgs rate;
  ConvertArgs convert;
  EntropyArgs entropy;
  DdgArgs ddg;
  ExtractArgs extract;
  std::uint64_t ergo_steps = 100000;

  auto* rate_cmd = app.add_subcommand("rate", "Avg / OI rates of a generator");
  rate_cmd->add_option("--gen", rate.gen, "vn, identity, dup, oscillating, block:<file>, peres:k, ddg:<tree>")->required();
  rate_cmd->add_option("--measure", rate.measure, "measure config or file")->required();
  rate_cmd->add_option("--n", rate.n, "input length (or schedule horizon)");
  rate_cmd->add_option("--schedule", rate.schedule, "comma-separated input lengths");
  rate_cmd->add_option("--in", rate.in, "bitstream file or seed for the OI trace");
  rate_cmd->add_option("--samples", rate.samples, "Monte-Carlo samples beyond the exact range");
  rate_cmd->add_flag("--exact", rate.exact, "exact rational Avg (or block rate without --n)");
  add_common(rate_cmd, common);

  auto* convert_cmd = app.add_subcommand("convert", "Interval conversion between measures");
  convert_cmd->add_option("--from", convert.from, "input measure")->required();
  convert_cmd->add_option("--to", convert.to, "output measure")->required();
  convert_cmd->add_option("--in", convert.in, "bitstream file or seed");
  convert_cmd->add_option("--out-bits", convert.out_bits, "output bits wanted");
  convert_cmd->add_option("--cap", convert.cap, "input bit cap");
  convert_cmd->add_option("--trace", convert.trace, "write checkpoint trace JSON here");
  convert_cmd->add_flag("--kautz", convert.kautz, "check both Kautz bounds along the run");
  convert_cmd->add_flag("--roundtrip", convert.roundtrip, "convert back and measure agreement");
  add_common(convert_cmd, common);

  auto* entropy_cmd = app.add_subcommand("entropy", "Entropy rate of a measure");
  entropy_cmd->add_option("--measure", entropy.measure, "measure config or file")->required();
  entropy_cmd->add_option("--n", entropy.n, "also estimate -log2 mu(x|n)/n on n sampled bits");
  entropy_cmd->add_option("--in", entropy.in, "bitstream file or seed");
  add_common(entropy_cmd, common);

  auto* ddg_cmd = app.add_subcommand("ddg", "DDG tree statistics and extraction");
  ddg_cmd->add_option("--tree", ddg.tree, "tree file or ky:p1,p2,...")->required();
  ddg_cmd->add_option("--tail-tol", ddg.tail_tol, "certified tail tolerance for infinite trees");
  ddg_cmd->add_option("--level", ddg.level, "truncate AvgRT at this level");
  ddg_cmd->add_option("--n", ddg.n, "extract from this many fair bits");
  ddg_cmd->add_option("--in", ddg.in, "bitstream file or seed");
  ddg_cmd->add_option("--samples", ddg.samples, "Monte-Carlo samples for Avg");
  ddg_cmd->add_option("--mc-n", ddg.mc_n, "input length for Monte-Carlo Avg");
  add_common(ddg_cmd, common);

  auto* extract_cmd = app.add_subcommand("extract", "Apply a generator to a stream prefix");
  extract_cmd->add_option("--gen", extract.gen, "generator")->required();
  extract_cmd->add_option("--measure", extract.measure, "source measure for sampled input");
  extract_cmd->add_option("--in", extract.in, "bitstream file or seed");
  extract_cmd->add_option("--n", extract.n, "input bits");
  extract_cmd->add_option("--out-bits", extract.out_bits, "also report the use for this many output bits");
  extract_cmd->add_option("--emit", extract.emit, "write extracted bits to this bitstream file");
  add_common(extract_cmd, common);

  auto* ergo_cmd = app.add_subcommand("ergo-check", "Exact mixing and Birkhoff checks");
  ergo_cmd->add_option("--k", ergo_steps, "Birkhoff steps");
  add_common(ergo_cmd, common);

  auto* selftest_cmd = app.add_subcommand("selftest", "Exact invariant suites");
  add_common(selftest_cmd, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    const bool multi = !common.seeds.empty();
    Job job;
    if (rate_cmd->parsed()) {
      job = rate_job(rate);
    } else if (convert_cmd->parsed()) {
      job = convert_job(convert, multi);
    } else if (entropy_cmd->parsed()) {
      job = entropy_job(entropy);
    } else if (ddg_cmd->parsed()) {
      job = ddg_job(ddg);
    } else if (extract_cmd->parsed()) {
      job = extract_job(extract, multi);
    } else if (ergo_cmd->parsed()) {
      job = ergo_job(ergo_steps);
    } else {
      job = selftest_job();
    }
    const int code = execute(job, common, args, out);
    if (code != kOk) err << job.command << ": one or more checks failed\n";
    return code;
  } catch (const ConversionStalled& e) {
    err << "contract failure: " << e.what() << "\n"
        << "  consumed " << e.partial.consumed << " input bits, produced " << e.partial.output.size()
        << " output bits\n";
    return kContractFailure;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const ContractViolation& e) {
    err << "contract failure: " << e.what() << "\n";
    return kContractFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kContractFailure;
  }
}

}  // namespace xrate::cli
