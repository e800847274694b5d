#include "asyncmetro/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "asyncmetro/oracle.hpp"
#include "asyncmetro/random.hpp"

namespace asyncmetro {

namespace pt = boost::property_tree;

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = seed_first; s <= seed_last; ++s) {
    out.push_back(s);
    if (s == UINT64_MAX) break;
  }
  return out;
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"kind", "q", "lambda", "beta", "interaction"}},
      {"graph", {"file", "generator", "n", "rows", "cols", "degree", "seed", "resample"}},
      {"chain", {"T", "extended", "y0", "y0_values"}},
      {"scheduler", {"policies", "policy", "seed", "delay"}},
      {"experiment", {"seeds", "repeats", "n_grid", "T_grid", "runs", "tv_threshold"}},
  };
  return keys;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(", \t"), boost::token_compress_on);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

template <class T>
T number(const std::string& where, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError(where + ": cannot parse '" + text + "'");
  return value;
}

bool boolean(const std::string& where, std::string text) {
  boost::to_lower(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError(where + ": expected a boolean, got '" + text + "'");
}

// "a-b" or a single value.
std::pair<std::uint64_t, std::uint64_t> seed_range(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    const auto s = number<std::uint64_t>("experiment.seeds", text);
    return {s, s};
  }
  const auto a = number<std::uint64_t>("experiment.seeds", boost::trim_copy(text.substr(0, dash)));
  const auto b = number<std::uint64_t>("experiment.seeds", boost::trim_copy(text.substr(dash + 1)));
  if (b < a) throw ConfigError("experiment.seeds: empty range '" + text + "'");
  return {a, b};
}

std::vector<std::vector<double>> parse_matrix(const std::string& text) {
  std::vector<std::string> rows;
  boost::split(rows, text, boost::is_any_of(";"));
  std::vector<std::vector<double>> m;
  for (const auto& row : rows) {
    if (boost::trim_copy(row).empty()) continue;
    std::vector<double> r;
    for (const auto& x : split_list(row)) r.push_back(number<double>("model.interaction", x));
    m.push_back(std::move(r));
  }
  return m;
}

InitialPolicy parse_initial(std::string text) {
  boost::to_lower(text);
  if (text == "default") return InitialPolicy::Default;
  if (text == "greedy-proper" || text == "greedy") return InitialPolicy::GreedyProper;
  if (text == "zero" || text == "all-zero") return InitialPolicy::Zero;
  if (text == "fixed") return InitialPolicy::Fixed;
  throw ConfigError("chain.y0: unknown policy '" + text + "'");
}

void apply(ExperimentConfig& cfg, const std::string& section, const std::string& key, const std::string& raw) {
  const std::string where = section + "." + key;
  const auto sit = known_keys().find(section);
  if (sit == known_keys().end()) throw ConfigError("unknown section [" + section + "]");
  if (!sit->second.contains(key)) throw ConfigError("unknown key " + where);
  const std::string value = boost::trim_copy(raw);

  if (section == "model") {
    if (key == "kind") {
      cfg.model = boost::to_lower_copy(value);
      if (cfg.model != "coloring" && cfg.model != "hardcore" && cfg.model != "ising" && cfg.model != "custom")
        throw ConfigError("model.kind: unknown model '" + value + "'");
    } else if (key == "q") {
      cfg.q = number<State>(where, value);
    } else if (key == "lambda") {
      cfg.lambda = number<double>(where, value);
    } else if (key == "beta") {
      cfg.beta = number<double>(where, value);
    } else {
      cfg.interaction = parse_matrix(value);
    }
  } else if (section == "graph") {
    if (key == "file") cfg.graph.file = value;
    else if (key == "generator") cfg.graph.generator = boost::to_lower_copy(value);
    else if (key == "n") cfg.graph.n = number<NodeId>(where, value);
    else if (key == "rows") cfg.graph.rows = number<NodeId>(where, value);
    else if (key == "cols") cfg.graph.cols = number<NodeId>(where, value);
    else if (key == "degree") cfg.graph.degree = number<std::uint32_t>(where, value);
    else if (key == "seed") cfg.graph.seed = number<std::uint64_t>(where, value);
    else cfg.graph.resample = boolean(where, value);
  } else if (section == "chain") {
    if (key == "T") {
      cfg.horizon = number<double>(where, value);
      if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) throw ConfigError("chain.T must be finite and >= 0");
    } else if (key == "extended") {
      cfg.extended_horizon = boolean(where, value);
    } else if (key == "y0") {
      cfg.initial = parse_initial(value);
    } else {
      cfg.initial_values.clear();
      for (const auto& x : split_list(value)) cfg.initial_values.push_back(number<State>(where, x));
    }
  } else if (section == "scheduler") {
    if (key == "policies" || key == "policy") {
      cfg.schedulers.clear();
      for (const auto& name : split_list(value)) {
        try {
          cfg.schedulers.push_back(parse_scheduler_policy(boost::to_lower_copy(name)));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(where + ": " + e.what());
        }
      }
      if (cfg.schedulers.empty()) throw ConfigError(where + ": no scheduler given");
    } else if (key == "seed") {
      cfg.scheduler_seed = number<std::uint64_t>(where, value);
    } else {
      cfg.fixed_delay = number<double>(where, value);
      if (!(cfg.fixed_delay > 0.0 && cfg.fixed_delay <= 1.0)) throw ConfigError("scheduler.delay must lie in (0,1]");
    }
  } else {
    if (key == "seeds") {
      std::tie(cfg.seed_first, cfg.seed_last) = seed_range(value);
    } else if (key == "repeats") {
      cfg.repeats = number<std::uint32_t>(where, value);
      if (cfg.repeats == 0) throw ConfigError("experiment.repeats must be positive");
    } else if (key == "n_grid") {
      cfg.n_grid.clear();
      for (const auto& x : split_list(value)) cfg.n_grid.push_back(number<NodeId>(where, x));
    } else if (key == "T_grid") {
      cfg.t_grid.clear();
      for (const auto& x : split_list(value)) cfg.t_grid.push_back(number<double>(where, x));
    } else if (key == "runs") {
      cfg.runs = number<std::uint32_t>(where, value);
    } else {
      cfg.tv_threshold = number<double>(where, value);
    }
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, leaf] : body) apply(cfg, section, key, leaf.data());
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("override '" + ov + "' is not section.key=value");
    apply(cfg, boost::trim_copy(ov.substr(0, dot)), boost::trim_copy(ov.substr(dot + 1, eq - dot - 1)),
          ov.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, overrides);
}

std::shared_ptr<const Graph> build_graph(const ExperimentConfig& cfg, std::optional<NodeId> n,
                                         std::uint64_t run_seed) {
  const auto& g = cfg.graph;
  try {
    if (!g.file.empty()) {
      std::ifstream in(g.file);
      if (!in) throw ConfigError("cannot open graph file '" + g.file + "'");
      return std::make_shared<const Graph>(graphs::read_edge_list(in, g.n));
    }
    const NodeId size = n.value_or(g.n);
    const std::uint64_t seed = g.resample ? rng::derive_seed(g.seed, run_seed) : g.seed;
    if (g.generator == "cycle") return std::make_shared<const Graph>(graphs::cycle(size));
    if (g.generator == "path") return std::make_shared<const Graph>(graphs::path(size));
    if (g.generator == "complete") return std::make_shared<const Graph>(graphs::complete(size));
    if (g.generator == "empty") return std::make_shared<const Graph>(graphs::empty(size));
    if (g.generator == "star") return std::make_shared<const Graph>(graphs::star(size == 0 ? 0 : size - 1));
    if (g.generator == "grid") {
      if (n) {
        const auto side = static_cast<NodeId>(std::lround(std::sqrt(static_cast<double>(*n))));
        if (side * side != *n) throw ConfigError("grid sweep needs square n, got " + std::to_string(*n));
        return std::make_shared<const Graph>(graphs::grid(side, side));
      }
      return std::make_shared<const Graph>(graphs::grid(g.rows, g.cols));
    }
    if (g.generator == "random-regular" || g.generator == "regular")
      return std::make_shared<const Graph>(graphs::random_regular(size, g.degree, seed));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
  throw ConfigError("graph.generator: unknown generator '" + g.generator + "'");
}

SpinModel build_model(const ExperimentConfig& cfg, std::shared_ptr<const Graph> graph) {
  try {
    if (cfg.model == "coloring") {
      if (cfg.q == 0) throw ConfigError("model.q must be at least 1 for coloring");
      return make_coloring(std::move(graph), cfg.q);
    }
    if (cfg.model == "hardcore") return make_hardcore(std::move(graph), cfg.lambda);
    if (cfg.model == "ising") return make_ising(std::move(graph), cfg.beta);
    if (cfg.interaction.empty()) throw ConfigError("custom model needs model.interaction");
    return make_pairwise(std::move(graph), cfg.interaction);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

double effective_horizon(const ExperimentConfig& cfg, double horizon, NodeId n) {
  if (!cfg.extended_horizon) return horizon;
  return discrete_continuous_bridge(horizon, std::max<NodeId>(n, 1)).extended_horizon;
}

Configuration greedy_proper_coloring(const Graph& graph, State q) {
  if (q <= graph.max_degree()) throw ConfigError("greedy proper coloring needs q > max degree");
  Configuration c;
  c.values.assign(graph.num_nodes(), 0);
  std::vector<char> used(q);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    std::fill(used.begin(), used.end(), 0);
    for (NodeId u : graph.neighbors(v))
      if (u < v) used[c[u]] = 1;
    State s = 0;
    while (used[s]) ++s;
    c[v] = s;
  }
  return c;
}

Configuration initial_configuration(const ExperimentConfig& cfg, const SpinModel& model) {
  const NodeId n = model.num_nodes();
  InitialPolicy policy = cfg.initial;
  if (policy == InitialPolicy::Default)
    policy = model.kind() == ModelKind::Coloring ? InitialPolicy::GreedyProper : InitialPolicy::Zero;
  switch (policy) {
    case InitialPolicy::GreedyProper:
      if (model.kind() != ModelKind::Coloring) throw ConfigError("chain.y0 = greedy-proper only applies to coloring");
      return greedy_proper_coloring(model.graph(), model.q());
    case InitialPolicy::Zero: {
      Configuration c;
      c.values.assign(n, 0);
      return c;
    }
    case InitialPolicy::Fixed: {
      Configuration c{cfg.initial_values};
      try {
        validate_configuration(model, c);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("chain.y0_values: ") + e.what());
      }
      return c;
    }
    case InitialPolicy::Default:
      break;
  }
  throw ConfigError("unreachable initial policy");
}

}  // namespace asyncmetro
