#include "sot/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sot/errors.hpp"
#include "sot/text.hpp"

namespace sot {

using nlohmann::json;

std::string ScoringPolicy::name() const {
  if (benchmark == Benchmark::gpqa) return "gpqa_exact";
  return multi_rule == MultiCorrectRule::partial_credit ? "jeebench_partial"
                                                        : "jeebench_all_or_nothing";
}

ScoringPolicy ScoringPolicy::from_name(std::string_view name) {
  if (name == "gpqa" || name == "gpqa_exact") return gpqa();
  if (name == "jeebench" || name == "jeebench_partial") return jeebench();
  if (name == "jeebench_all_or_nothing") {
    ScoringPolicy p = jeebench();
    p.multi_rule = MultiCorrectRule::all_or_nothing;
    return p;
  }
  throw ConfigError("unknown scoring policy \"" + std::string(name) + "\"");
}

double score_gpqa(const PredictedAnswer& pred, const GoldAnswer& gold) {
  const LabelSet* g = gold.labels();
  if (g == nullptr) throw ScoringError("score_gpqa needs a label gold answer");
  const LabelSet* p = pred.labels();
  return (p != nullptr && *p == *g) ? 1.0 : 0.0;
}

namespace {

std::optional<double> predicted_number(const PredictedAnswer& pred) {
  if (const auto* i = pred.integer()) return static_cast<double>(*i);
  if (const auto* d = pred.numeric()) return *d;
  return std::nullopt;
}

}  // namespace

double score_jeebench(const PredictedAnswer& pred, const GoldAnswer& gold,
                      AnswerKind kind, const ScoringPolicy& policy) {
  switch (kind) {
    case AnswerKind::single_mcq: {
      if (gold.labels() == nullptr) throw ScoringError("single_mcq gold must be labels");
      return score_gpqa(pred, gold);
    }
    case AnswerKind::multi_mcq: {
      const LabelSet* g = gold.labels();
      if (g == nullptr || g->empty()) {
        throw ScoringError("multi_mcq gold must be non-empty labels");
      }
      const LabelSet* p = pred.labels();
      if (p == nullptr || p->empty()) return 0.0;
      for (char l : *p) {
        if (!g->contains(l)) return 0.0;
      }
      if (policy.multi_rule == MultiCorrectRule::all_or_nothing) {
        return *p == *g ? 1.0 : 0.0;
      }
      return static_cast<double>(p->size()) / static_cast<double>(g->size());
    }
    case AnswerKind::integer: {
      const std::int64_t* g = gold.integer();
      if (g == nullptr) throw ScoringError("integer gold must be an integer");
      if (const auto* i = pred.integer()) return *i == *g ? 1.0 : 0.0;
      if (const auto* d = pred.numeric()) {
        return *d == static_cast<double>(*g) ? 1.0 : 0.0;
      }
      return 0.0;
    }
    case AnswerKind::numeric: {
      const double* g = gold.numeric();
      if (g == nullptr) throw ScoringError("numeric gold must be a decimal");
      auto v = predicted_number(pred);
      if (!v) return 0.0;
      // Slack for binary representation of decimal inputs (2.51 - 2.5).
      const double slack = 1e-9 * std::max(1.0, std::abs(*g));
      return std::abs(*v - *g) <= policy.numeric_tolerance + slack ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

double score(const PredictedAnswer& pred, const Problem& p,
             const ScoringPolicy& policy) {
  if (policy.benchmark == ScoringPolicy::Benchmark::gpqa) {
    if (p.answer_kind != AnswerKind::single_mcq) {
      throw ScoringError("gpqa scoring needs single_mcq problems (" + p.id + ")");
    }
    return score_gpqa(pred, p.gold);
  }
  return score_jeebench(pred, p.gold, p.answer_kind, policy);
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::overall: return "overall";
    case Dimension::subject: return "subject";
    case Dimension::answer_kind: return "answer_kind";
  }
  return "";
}

std::optional<Dimension> parse_dimension(std::string_view s) {
  if (s == "overall") return Dimension::overall;
  if (s == "subject") return Dimension::subject;
  if (s == "answer_kind") return Dimension::answer_kind;
  return std::nullopt;
}

const GroupStat* ScoreCard::find(Dimension d, const std::string& key) const {
  auto it = groups.find({d, key});
  return it == groups.end() ? nullptr : &it->second;
}

double ScoreCard::overall() const {
  const GroupStat* g = find(Dimension::overall, "all");
  return g ? g->mean_score : 0.0;
}

ScoreCard aggregate(const std::vector<std::pair<Problem, ProblemScore>>& scores) {
  if (scores.empty()) throw PreconditionError("aggregate needs at least one score");
  ScoreCard card;
  std::map<GroupKey, std::pair<double, std::size_t>> sums;
  for (const auto& [problem, s] : scores) {
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      throw PreconditionError("score out of [0,1] for " + s.problem_id);
    }
    card.per_problem.push_back(s);
    for (GroupKey key : {GroupKey{Dimension::overall, "all"},
                         GroupKey{Dimension::subject, problem.subject},
                         GroupKey{Dimension::answer_kind,
                                  std::string(to_string(problem.answer_kind))}}) {
      auto& [sum, n] = sums[key];
      sum += s.score;
      ++n;
    }
  }
  for (const auto& [key, acc] : sums) {
    card.groups[key] = {acc.first / static_cast<double>(acc.second), acc.second};
  }
  return card;
}

json to_json(const ScoreCard& card) {
  json per = json::array();
  for (const auto& s : card.per_problem) {
    per.push_back(
        {{"problem_id", s.problem_id}, {"score", s.score}, {"solved", s.solved}});
  }
  json groups = json::array();
  for (const auto& [key, stat] : card.groups) {
    groups.push_back({{"dimension", to_string(key.dimension)},
                      {"key", key.key},
                      {"mean_score", stat.mean_score},
                      {"n", stat.n}});
  }
  return {{"groups", groups}, {"per_problem", per}};
}

ScoreCard scorecard_from_json(const json& j) {
  ScoreCard card;
  for (const auto& s : j.at("per_problem")) {
    card.per_problem.push_back({s.at("problem_id").get<std::string>(),
                                s.at("score").get<double>(),
                                s.at("solved").get<bool>()});
  }
  for (const auto& g : j.at("groups")) {
    auto dim = parse_dimension(g.at("dimension").get<std::string>());
    if (!dim) throw std::runtime_error("bad scorecard dimension");
    card.groups[{*dim, g.at("key").get<std::string>()}] = {
        g.at("mean_score").get<double>(), g.at("n").get<std::size_t>()};
  }
  return card;
}

std::string to_csv(const ScoreCard& card) {
  std::ostringstream out;
  out << "dimension,key,mean_score,n\n";
  for (const auto& [key, stat] : card.groups) {
    out << to_string(key.dimension) << ',' << csv_escape(key.key) << ','
        << format_fixed(stat.mean_score, 6) << ',' << stat.n << '\n';
  }
  return out.str();
}

std::string format_percent(double mean) { return format_fixed(mean * 100.0, 2); }

std::string format_fraction(double mean) { return format_fixed(mean, 3); }

}  // namespace sot
