#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "prefplan/fable.hpp"
#include "prefplan/mcmc.hpp"
#include "prefplan/mistakes.hpp"
#include "prefplan/sailing.hpp"

namespace prefplan::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::string, double, long long>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Output {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> params;
  Table table;
};

template <class T>
std::string str(T x) {
  if constexpr (std::is_floating_point_v<T>)
    return format_double(x);
  else
    return std::to_string(x);
}

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<long long>(c));
}

std::string metadata_line(const Output& o) {
  std::string line = std::string("# prefplan ") + kVersion + " " + o.subcommand;
  for (const auto& [k, v] : o.params) line += " " + k + "=" + v;
  return line;
}

void write_csv(std::ostream& out, const Output& o) {
  out << metadata_line(o) << '\n';
  for (std::size_t i = 0; i < o.table.columns.size(); ++i) out << (i ? "," : "") << o.table.columns[i];
  out << '\n';
  for (const auto& row : o.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
}

void write_text(std::ostream& out, const Output& o) {
  out << metadata_line(o) << '\n';
  std::vector<std::size_t> width(o.table.columns.size());
  for (std::size_t i = 0; i < width.size(); ++i) width[i] = o.table.columns[i].size();
  for (const auto& row : o.table.rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], cell_text(row[i]).size());
  auto emit = [&](auto&& text_of, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out << "  ";
      out << std::left << std::setw(static_cast<int>(width[i])) << text_of(i);
    }
    out << '\n';
  };
  emit([&](std::size_t i) { return o.table.columns[i]; }, width.size());
  for (const auto& row : o.table.rows) emit([&](std::size_t i) { return cell_text(row[i]); }, row.size());
}

// JSON has no comments, so the metadata line becomes a "meta" object.
void write_json(std::ostream& out, const Output& o) {
  nlohmann::ordered_json meta;
  meta["program"] = "prefplan";
  meta["version"] = kVersion;
  meta["subcommand"] = o.subcommand;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : o.params) params[k] = v;
  meta["params"] = params;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : o.table.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit([&](const auto& v) { r[o.table.columns[i]] = v; }, row[i]);
    rows.push_back(r);
  }
  nlohmann::ordered_json doc;
  doc["meta"] = meta;
  doc["columns"] = o.table.columns;
  doc["rows"] = rows;
  out << doc.dump(2) << '\n';
}

struct Common {
  std::string format = "csv";
  std::string out_path;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* app, Common& c, std::vector<std::string> formats, bool with_seed = true) {
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember(std::move(formats)))->capture_default_str();
  app->add_option("--out", c.out_path, "Write output to this file instead of stdout");
  if (with_seed) app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string preset;
  std::optional<double> p1a, pma, p1b, pmb;
  int depth = 10;
  std::size_t iters = 5000;
};

Output fable_sweep(const SweepArgs& a, const Common& c) {
  const bool custom = a.p1a || a.pma || a.p1b || a.pmb;
  if (custom && !a.preset.empty()) throw UsageError("--preset cannot be combined with --p1a/--pma/--p1b/--pmb");
  if (custom && !(a.p1a && a.pma && a.p1b && a.pmb))
    throw UsageError("a custom configuration needs all of --p1a, --pma, --p1b, --pmb");
  if (a.iters < 100) throw UsageError("--iters must be at least 100");

  std::string preset_name = custom ? "custom" : (a.preset.empty() ? "meet-symmetric" : a.preset);
  std::optional<fable::Preset> config;
  if (custom) {
    config = fable::Preset{"custom", fable::AgentPreferences("Alice", *a.p1a, *a.pma),
                           fable::AgentPreferences("Bob", *a.p1b, *a.pmb)};
  } else {
    const fable::Preset* p = fable::find_preset(preset_name);
    if (!p) {
      std::string known;
      for (const auto& q : fable::presets()) known += (known.empty() ? "" : ", ") + q.name;
      throw UsageError("unknown preset '" + preset_name + "' (known: " + known + ")");
    }
    config = *p;
  }
  const auto& alice = config->alice;
  const auto& bob = config->bob;

  Output o;
  o.subcommand = "fable sweep";
  o.params = {{"preset", preset_name}, {"p1a", str(alice.p1)},  {"pma", str(alice.pm)},
              {"p1b", str(bob.p1)},    {"pmb", str(bob.pm)},    {"depth", str(a.depth)},
              {"iters", str(a.iters)}, {"burn_in", "0.1"},   {"seed", str(c.seed)}};
  o.table.columns = {"agent", "depth", "p_first", "method", "stderr", "seed"};
  const auto seed_cell = static_cast<long long>(c.seed);

  const fable::DepthSweep exact = fable::analytical_sweep(alice, bob, a.depth);
  for (int who = 0; who < 2; ++who)
    for (int d = 0; d <= a.depth; ++d)
      o.table.rows.push_back({who == 0 ? alice.name : bob.name, static_cast<long long>(d),
                              who == 0 ? exact.me[d] : exact.other[d], std::string("analytical"), 0.0, seed_cell});
  fable::McChooser chooser(a.iters, c.seed);
  for (int who = 0; who < 2; ++who)
    for (int d = 0; d <= a.depth; ++d) {
      const auto r = who == 0 ? chooser.choose(alice, bob, d) : chooser.choose(bob, alice, d);
      o.table.rows.push_back({who == 0 ? alice.name : bob.name, static_cast<long long>(d), r.p_first,
                              std::string(fable::to_string(r.method)), r.std_error, seed_cell});
    }
  return o;
}

struct LearnArgs {
  double p1 = 0.55;
  double pm = 0.9;
  std::optional<double> other_p1;
  int visits = 3;
  int depth = 6;
  std::size_t iters = 5000;
  std::size_t samples = 100;
  double prior_scale = 2.5;
  double proposal_scale = 1.5;
};

Output fable_learn(const LearnArgs& a, const Common& c) {
  if (a.visits < 1) throw UsageError("--visits must be at least 1");
  if (a.samples < 1) throw UsageError("--samples must be at least 1");
  if (a.iters < 100) throw UsageError("--iters must be at least 100");
  const fable::AgentPreferences me("Alice", a.p1, a.pm);
  const double other_p1 = a.other_p1.value_or(a.p1);
  fable::AgentPreferences("Bob", other_p1, 0.5);  // validates other_p1

  fable::LearningOptions opts;
  opts.depth = a.depth;
  opts.prior = {0.0, a.prior_scale};
  opts.other_p1 = other_p1;
  opts.n_iters = a.iters;
  opts.proposal_scale = a.proposal_scale;
  opts.n_samples = a.samples;
  if (opts.n_samples > opts.n_iters - static_cast<std::size_t>(0.1 * static_cast<double>(opts.n_iters)))
    throw UsageError("--samples exceeds the retained chain length");

  opts.seed = derive_seed(c.seed, {1});
  const auto first = fable::infer_meeting_preference(me, std::vector<fable::Bar>(a.visits, fable::Bar::first), opts);
  opts.seed = derive_seed(c.seed, {2});
  const auto second =
      fable::infer_meeting_preference(me, std::vector<fable::Bar>(a.visits, fable::Bar::second), opts);

  Output o;
  o.subcommand = "fable learn";
  o.params = {{"p1", str(a.p1)},
              {"pm", str(a.pm)},
              {"other_p1", str(other_p1)},
              {"visits", str(a.visits)},
              {"depth", str(a.depth)},
              {"iters", str(a.iters)},
              {"samples", str(a.samples)},
              {"prior_scale", str(a.prior_scale)},
              {"proposal_scale", str(a.proposal_scale)},
              {"seed", str(c.seed)}};
  o.table.columns = {"index", "log_odds_first", "log_odds_second"};
  for (std::size_t i = 0; i < a.samples; ++i)
    o.table.rows.push_back({static_cast<long long>(i), first.log_odds_samples[i], second.log_odds_samples[i]});
  return o;
}

struct MistakesArgs {
  double p1 = 0.55;
  double q = 0.55;
  double evader_p1 = 0.5;
  double chaser_p1 = 0.55;
};

Output mistakes_demo(const MistakesArgs& a) {
  const auto fap = mistakes::future_as_present_report(a.p1, a.q);
  const auto ssn = mistakes::single_sample_nesting_policy(a.evader_p1, a.chaser_p1);
  Output o;
  o.subcommand = "mistakes";
  o.params = {{"p1", str(a.p1)},
              {"q", str(a.q)},
              {"evader_p1", str(a.evader_p1)},
              {"chaser_p1", str(a.chaser_p1)},
              {"seed", "none"}};
  o.table.columns = {"model", "policy", "claimed_value", "true_value", "rational_value"};
  for (const auto& r : {fap, ssn})
    o.table.rows.push_back({r.model_name, r.policy, r.claimed_value, r.true_value, r.rational_value});
  return o;
}

struct SailingArgs {
  int size = 25;
  std::size_t samples = 10000;
  std::size_t inner = 20;
  std::optional<std::size_t> blocks;
  double scale = 0.25;
  double init = 1.5;
  bool smoke = false;
  std::string policy;
  std::size_t rollouts = 10000;
  bool point_estimate = false;
  std::vector<int> sizes{25, 50, 100};
};

sailing::InferThetaOptions infer_options(const SailingArgs& a, Seed seed) {
  if (a.samples < 1) throw UsageError("--samples must be at least 1");
  sailing::InferThetaOptions o;
  o.n_samples = a.samples;
  o.n_inner = a.smoke ? 4 : a.inner;
  o.n_blocks = a.smoke ? 4 : a.blocks.value_or(o.n_inner);
  if (o.n_inner < 1) throw UsageError("--inner must be at least 1");
  if (o.n_blocks < 1 || o.n_blocks > o.n_inner) throw UsageError("--blocks must lie in [1, --inner]");
  o.proposal_scale = a.scale;
  o.init_log_theta = a.init;
  o.seed = seed;
  return o;
}

std::vector<std::pair<std::string, std::string>> infer_params(const sailing::InferThetaOptions& o, bool smoke) {
  return {{"samples", str(o.n_samples)}, {"inner", str(o.n_inner)},     {"blocks", str(o.n_blocks)},
          {"scale", str(o.proposal_scale)}, {"init", str(o.init_log_theta)}, {"smoke", smoke ? "1" : "0"}};
}

void report_chain(const sailing::ThetaPosterior& post, std::ostream& err) {
  err << "acceptance rate " << format_double(post.log_theta.acceptance_rate) << ", offset "
      << format_double(post.offset) << ", rejected non-finite estimates " << post.log_theta.nonfinite_rejections
      << '\n';
}

Output sailing_infer(const SailingArgs& a, const Common& c, std::ostream& err) {
  const sailing::LakeSpec lake(a.size);
  const auto opts = infer_options(a, c.seed);
  const auto post = sailing::infer_theta(lake, {}, {}, opts);
  report_chain(post, err);
  Output o;
  o.subcommand = "sailing infer";
  o.params = {{"size", str(a.size)}};
  for (auto& p : infer_params(opts, a.smoke)) o.params.push_back(std::move(p));
  o.params.emplace_back("seed", str(c.seed));
  o.table.columns = {"index", "theta"};
  const auto theta = post.theta();
  for (std::size_t i = 0; i < theta.size(); ++i) o.table.rows.push_back({static_cast<long long>(i), theta[i]});
  return o;
}

sailing::PolicyEvaluation evaluate_named(const std::string& policy, const SailingArgs& a, int size, Seed seed,
                                         std::ostream& err) {
  const sailing::LakeSpec lake(size);
  const sailing::WindModel wind;
  const sailing::CostTable costs;
  const Seed eval_seed = derive_seed(seed, {2});
  sailing::PolicyEvaluation e;
  if (policy == "greedy") {
    e = sailing::evaluate_policy(sailing::greedy_sampler(lake, costs), lake, wind, costs, a.rollouts, eval_seed);
  } else if (policy == "optimal") {
    const auto values = sailing::solve_optimal_values(lake, wind, costs, 1e-9);
    e = sailing::evaluate_policy(sailing::optimal_sampler(values, wind, costs), lake, wind, costs, a.rollouts,
                                 eval_seed);
  } else {
    const auto post = sailing::infer_theta(lake, wind, costs, infer_options(a, derive_seed(seed, {1})));
    report_chain(post, err);
    if (a.point_estimate) {
      const double theta = std::exp(post.log_theta.quantile(0.5));
      e = sailing::evaluate_policy(sailing::theta_policy(sailing::PolicyParam(theta), lake, costs, post.form), lake,
                                   wind, costs, a.rollouts, eval_seed);
    } else {
      e = sailing::evaluate_policy(sailing::posterior_policy(post, lake, costs), lake, wind, costs, a.rollouts,
                                   eval_seed);
    }
  }
  if (e.truncation_warning)
    err << "warning: " << e.n_truncated << " of " << e.n_rollouts << " " << policy << " rollouts truncated\n";
  return e;
}

Output sailing_eval(const SailingArgs& a, const Common& c, std::ostream& err) {
  if (a.rollouts < 100) throw UsageError("--rollouts must be at least 100");
  sailing::LakeSpec(a.size);  // validates size
  const auto e = evaluate_named(a.policy, a, a.size, c.seed, err);
  Output o;
  o.subcommand = "sailing eval";
  o.params = {{"policy", a.policy}, {"size", str(a.size)}, {"rollouts", str(a.rollouts)}};
  if (a.policy == "inferred") {
    for (auto& p : infer_params(infer_options(a, 0), a.smoke)) o.params.push_back(std::move(p));
    o.params.emplace_back("point_estimate", a.point_estimate ? "1" : "0");
  }
  o.params.emplace_back("seed", str(c.seed));
  o.table.columns = {"policy", "size", "mean_cost", "stderr", "n_rollouts"};
  o.table.rows.push_back({a.policy, static_cast<long long>(a.size), e.mean_cost, e.std_error,
                          static_cast<long long>(e.n_rollouts)});
  return o;
}

Output sailing_table(const SailingArgs& a, const Common& c, std::ostream& err) {
  if (a.rollouts < 100) throw UsageError("--rollouts must be at least 100");
  if (a.sizes.empty()) throw UsageError("--sizes must list at least one size");
  for (int s : a.sizes) sailing::LakeSpec{s};
  Output o;
  o.subcommand = "sailing table";
  std::string sizes;
  for (int s : a.sizes) sizes += (sizes.empty() ? "" : ";") + std::to_string(s);
  o.params = {{"sizes", sizes}, {"rollouts", str(a.rollouts)}};
  for (auto& p : infer_params(infer_options(a, 0), a.smoke)) o.params.push_back(std::move(p));
  o.params.emplace_back("seed", str(c.seed));
  o.table.columns = {"policy"};
  for (int s : a.sizes) o.table.columns.push_back(std::to_string(s));
  for (const std::string policy : {"inferred", "greedy", "optimal"}) {
    std::vector<Cell> row{policy};
    for (std::size_t i = 0; i < a.sizes.size(); ++i)
      row.push_back(evaluate_named(policy, a, a.sizes[i], derive_seed(c.seed, {i}), err).mean_cost);
    o.table.rows.push_back(std::move(row));
  }
  return o;
}

void emit(const Output& o, const Common& c, std::ostream& out) {
  std::ofstream file;
  std::ostream* dest = &out;
  if (!c.out_path.empty()) {
    file.open(c.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file " + c.out_path);
    dest = &file;
  }
  if (c.format == "json")
    write_json(*dest, o);
  else if (c.format == "text")
    write_text(*dest, o);
  else
    write_csv(*dest, o);
  dest->flush();
  if (!*dest) throw std::runtime_error("failed writing output");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planning as inference with probabilistic preferences", "prefplan"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  std::function<Output()> action;

  auto* fable_cmd = app.add_subcommand("fable", "The two-bar fable")->require_subcommand(1);

  SweepArgs sweep;
  auto* sweep_cmd = fable_cmd->add_subcommand("sweep", "Choice probabilities over deliberation depths");
  sweep_cmd->add_option("--preset", sweep.preset, "Named preference configuration");
  sweep_cmd->add_option("--p1a", sweep.p1a, "First agent's bar preference");
  sweep_cmd->add_option("--pma", sweep.pma, "First agent's meeting preference");
  sweep_cmd->add_option("--p1b", sweep.p1b, "Second agent's bar preference");
  sweep_cmd->add_option("--pmb", sweep.pmb, "Second agent's meeting preference");
  sweep_cmd->add_option("--depth", sweep.depth, "Maximum depth")->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_cmd->add_option("--iters", sweep.iters, "MH iterations per chain")->capture_default_str();
  add_common(sweep_cmd, common, {"csv", "json"});
  sweep_cmd->callback([&] { action = [&] { return fable_sweep(sweep, common); }; });

  LearnArgs learn;
  auto* learn_cmd = fable_cmd->add_subcommand("learn", "Infer the other agent's meeting preference");
  learn_cmd->add_option("--p1", learn.p1, "Learner's bar preference")->capture_default_str();
  learn_cmd->add_option("--pm", learn.pm, "Learner's meeting preference")->capture_default_str();
  learn_cmd->add_option("--other-p1", learn.other_p1, "Other agent's bar preference (default: --p1)");
  learn_cmd->add_option("--visits", learn.visits, "Observed visits per scenario")->capture_default_str();
  learn_cmd->add_option("--depth", learn.depth, "Depth of the other agent's choice model")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  learn_cmd->add_option("--iters", learn.iters, "MH iterations")->capture_default_str();
  learn_cmd->add_option("--samples", learn.samples, "Posterior samples per scenario")->capture_default_str();
  learn_cmd->add_option("--prior-scale", learn.prior_scale, "Scale of the normal log-odds prior")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  learn_cmd->add_option("--proposal-scale", learn.proposal_scale, "Random-walk proposal scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(learn_cmd, common, {"csv", "json"});
  learn_cmd->callback([&] { action = [&] { return fable_learn(learn, common); }; });

  MistakesArgs mist;
  auto* mist_cmd = app.add_subcommand("mistakes", "Flawed planning-as-inference formulations");
  mist_cmd->add_option("--p1", mist.p1, "Bar preference for future-as-present")->capture_default_str();
  mist_cmd->add_option("--q", mist.q, "Anticipated other-agent probability of the first bar")->capture_default_str();
  mist_cmd->add_option("--evader-p1", mist.evader_p1, "Evader's bar preference")->capture_default_str();
  mist_cmd->add_option("--chaser-p1", mist.chaser_p1, "Chaser's bar preference")->capture_default_str();
  add_common(mist_cmd, common, {"csv", "text", "json"}, false);
  mist_cmd->callback([&] { action = [&] { return mistakes_demo(mist); }; });

  auto* sail_cmd = app.add_subcommand("sailing", "The sailing problem")->require_subcommand(1);
  SailingArgs sail;
  auto add_infer = [&](CLI::App* cmd) {
    cmd->add_option("--samples", sail.samples, "Retained posterior samples")->capture_default_str();
    cmd->add_option("--inner", sail.inner, "Rollouts per likelihood estimate")->capture_default_str();
    cmd->add_option("--blocks", sail.blocks, "Seed blocks, one redrawn per iteration (default: --inner)");
    cmd->add_option("--scale", sail.scale, "Proposal scale on log theta")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--init", sail.init, "Initial log theta")->capture_default_str();
    cmd->add_flag("--smoke", sail.smoke, "Cheap likelihood estimates for a quick check");
  };
  auto* infer_cmd = sail_cmd->add_subcommand("infer", "Posterior over theta");
  infer_cmd->add_option("--size", sail.size, "Lake size")->capture_default_str();
  add_infer(infer_cmd);
  add_common(infer_cmd, common, {"csv", "json"});
  infer_cmd->callback([&] { action = [&] { return sailing_infer(sail, common, err); }; });

  auto* eval_cmd = sail_cmd->add_subcommand("eval", "Mean travel cost of a policy");
  eval_cmd->add_option("--policy", sail.policy, "Policy")
      ->required()
      ->check(CLI::IsMember({"inferred", "greedy", "optimal"}));
  eval_cmd->add_option("--size", sail.size, "Lake size")->capture_default_str();
  eval_cmd->add_option("--rollouts", sail.rollouts, "Rollouts")->capture_default_str();
  eval_cmd->add_flag("--point-estimate", sail.point_estimate, "Use the posterior median theta");
  add_infer(eval_cmd);
  add_common(eval_cmd, common, {"csv", "json"});
  eval_cmd->callback([&] { action = [&] { return sailing_eval(sail, common, err); }; });

  auto* table_cmd = sail_cmd->add_subcommand("table", "Travel cost of all policies over lake sizes");
  table_cmd->add_option("--sizes", sail.sizes, "Lake sizes")->delimiter(',')->capture_default_str();
  table_cmd->add_option("--rollouts", sail.rollouts, "Rollouts per cell")->capture_default_str();
  add_infer(table_cmd);
  add_common(table_cmd, common, {"csv", "json"});
  table_cmd->callback([&] { action = [&] { return sailing_table(sail, common, err); }; });

  // CLI11 wants the arguments in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }

  try {
    emit(action(), common, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_error;
  }
  return ok;
}

}  // namespace prefplan::cli
