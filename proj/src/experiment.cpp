#include "forumdiv/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "forumdiv/csv.hpp"
#include "forumdiv/mmr.hpp"

namespace forumdiv {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ListLabel label) { return label == ListLabel::A ? "A" : "B"; }

std::string_view to_string(Question question) {
  switch (question) {
    case Question::Inclusion: return "inclusion";
    case Question::Diversity: return "diversity";
    case Question::Redundancy: return "redundancy";
  }
  return "?";
}

ListLabel parse_list_label(std::string_view s) {
  if (s == "A") return ListLabel::A;
  if (s == "B") return ListLabel::B;
  throw ValidationError("answer must be \"A\" or \"B\", got \"" + std::string(s) + "\"");
}

const std::vector<Question>& all_questions() {
  static const std::vector<Question> qs{Question::Inclusion, Question::Diversity, Question::Redundancy};
  return qs;
}

ListLabel Answers::operator[](Question q) const {
  switch (q) {
    case Question::Inclusion: return inclusion;
    case Question::Diversity: return diversity;
    case Question::Redundancy: return redundancy;
  }
  return inclusion;
}

// ---------------------------------------------------------------------------
// Trial generation

std::string sample_probe(const std::vector<ProbeCandidate>& candidates, Rng& rng) {
  if (candidates.empty()) throw ParameterError("sample_probe: no candidates");
  std::uint64_t total = 0;
  for (const auto& c : candidates) total += c.reply_count + 1;
  std::uint64_t draw = uniform_index(rng, total);
  for (const auto& c : candidates) {
    const std::uint64_t w = c.reply_count + 1;
    if (draw < w) return c.comment_id;
    draw -= w;
  }
  return candidates.back().comment_id;
}

std::string sample_probe(const std::vector<ProbeCandidate>& candidates, std::uint64_t seed) {
  Rng rng(seed);
  return sample_probe(candidates, rng);
}

namespace {

std::vector<std::string> ids_of(const Ranking& r) {
  std::vector<std::string> ids;
  for (const auto& item : r.items) ids.push_back(item.comment_id);
  return ids;
}

std::string format_lambda(double lambda) {
  std::ostringstream s;
  s << lambda;
  return s.str();
}

}  // namespace

TrialSet generate_trials(const Corpus& corpus, const SimilarityMatrix& sims, const TrialConfig& config) {
  if (config.list_size < 1) throw ParameterError("trials: list size must be >= 1");
  std::vector<const Topic*> eligible;
  for (const auto& t : corpus.topics()) {
    if (t.comment_ids.size() >= config.list_size + 1) eligible.push_back(&t);
  }
  if (eligible.empty() && config.n_low + config.n_high > 0) {
    throw ParameterError("trials: no topic has at least " + std::to_string(config.list_size + 1) + " comments");
  }

  struct TopicLists {
    std::vector<std::string> baseline;
    std::map<double, std::vector<std::string>> mmr;
  };
  std::map<std::size_t, MmrInput> inputs;
  std::map<std::size_t, TopicLists> lists;
  auto lists_for = [&](std::size_t t, double lambda) -> std::pair<const std::vector<std::string>*, const std::vector<std::string>*> {
    auto [it, fresh] = inputs.try_emplace(t);
    if (fresh) {
      it->second = make_mmr_input(corpus, *eligible[t], sims, config.model);
      lists[t].baseline = ids_of(baseline_ranking(it->second, config.list_size));
    }
    auto& entry = lists[t];
    auto m = entry.mmr.find(lambda);
    if (m == entry.mmr.end()) {
      m = entry.mmr.emplace(lambda, ids_of(mmr_rerank(it->second, lambda, config.list_size))).first;
    }
    return {&entry.baseline, &m->second};
  };

  auto shown = [&](const std::vector<std::string>& ids) {
    std::vector<ShownComment> out;
    for (const auto& id : ids) out.push_back({id, corpus.comment(id).text});
    return out;
  };

  std::vector<double> conditions(config.n_low, config.lambda_low);
  conditions.insert(conditions.end(), config.n_high, config.lambda_high);

  Rng rng(config.seed);
  TrialSet out;
  std::map<double, std::set<std::size_t>> unusable;
  for (double lambda : conditions) {
    while (true) {
      const auto t = static_cast<std::size_t>(uniform_index(rng, eligible.size()));
      const Topic& topic = *eligible[t];
      auto& bad = unusable[lambda];
      if (bad.count(t)) continue;
      auto [baseline, mmr] = lists_for(t, lambda);

      std::vector<ProbeCandidate> candidates;
      for (const auto& id : topic.comment_ids) {
        if (std::find(baseline->begin(), baseline->end(), id) != baseline->end()) continue;
        if (std::find(mmr->begin(), mmr->end(), id) != mmr->end()) continue;
        candidates.push_back({id, corpus.comment(id).reply_count});
      }
      const char* reason = *baseline == *mmr ? "baseline and MMR lists are identical"
                           : candidates.empty() ? "no probe candidate outside both lists"
                                                : nullptr;
      if (reason) {
        out.log.push_back("skipped topic " + topic.id + " at lambda " + format_lambda(lambda) + ": " + reason);
        bad.insert(t);
        if (bad.size() == eligible.size()) {
          throw ParameterError("trials: no topic yields distinct baseline and MMR lists at lambda " +
                               format_lambda(lambda));
        }
        continue;
      }

      Trial trial;
      trial.topic_id = topic.id;
      trial.question = topic.question;
      trial.hidden.lambda = lambda;
      trial.hidden.seed = rng();
      Rng trial_rng(trial.hidden.seed);
      trial.hidden.mmr_list = uniform_index(trial_rng, 2) == 0 ? ListLabel::A : ListLabel::B;
      const auto probe = sample_probe(candidates, trial_rng);
      trial.probe_c = {probe, corpus.comment(probe).text};
      if (trial.hidden.mmr_list == ListLabel::A) {
        trial.list_a = shown(*mmr);
        trial.list_b = shown(*baseline);
      } else {
        trial.list_a = shown(*baseline);
        trial.list_b = shown(*mmr);
      }
      out.trials.push_back(std::move(trial));
      break;
    }
  }

  // Ids are assigned after shuffling so they carry no condition information.
  shuffle(out.trials, rng);
  const int width = std::max<int>(3, static_cast<int>(std::to_string(out.trials.size()).size()));
  for (std::size_t i = 0; i < out.trials.size(); ++i) {
    std::string num = std::to_string(i + 1);
    out.trials[i].trial_id = "trial-" + std::string(width - num.size(), '0') + num;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json shown_json(const ShownComment& c) { return {{"comment_id", c.comment_id}, {"text", c.text}}; }

ordered_json list_json(const std::vector<ShownComment>& list) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : list) arr.push_back(shown_json(c));
  return arr;
}

ShownComment shown_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("comment_id") || !j.contains("text") || !j["comment_id"].is_string() ||
      !j["text"].is_string()) {
    throw ValidationError(where + ": comment entries need string comment_id and text");
  }
  return {j["comment_id"].get<std::string>(), j["text"].get<std::string>()};
}

}  // namespace

std::string trials_to_json(const std::vector<Trial>& trials) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : trials) {
    arr.push_back({{"trial_id", t.trial_id},
                   {"topic_id", t.topic_id},
                   {"question", t.question},
                   {"list_A", list_json(t.list_a)},
                   {"list_B", list_json(t.list_b)},
                   {"probe_C", shown_json(t.probe_c)},
                   {"hidden",
                    {{"mmr_list", to_string(t.hidden.mmr_list)},
                     {"lambda", t.hidden.lambda},
                     {"seed", t.hidden.seed}}}});
  }
  return arr.dump(2) + "\n";
}

std::vector<Trial> parse_trials_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed trial bundle: ") + e.what());
  }
  if (!doc.is_array()) throw ValidationError("trial bundle must be a JSON array");
  std::vector<Trial> trials;
  std::set<std::string> seen;
  for (const auto& j : doc) {
    try {
      Trial t;
      t.trial_id = j.at("trial_id").get<std::string>();
      t.topic_id = j.at("topic_id").get<std::string>();
      t.question = j.at("question").get<std::string>();
      for (const auto& c : j.at("list_A")) t.list_a.push_back(shown_from(c, t.trial_id));
      for (const auto& c : j.at("list_B")) t.list_b.push_back(shown_from(c, t.trial_id));
      t.probe_c = shown_from(j.at("probe_C"), t.trial_id);
      const auto& h = j.at("hidden");
      t.hidden.mmr_list = parse_list_label(h.at("mmr_list").get<std::string>());
      t.hidden.lambda = h.at("lambda").get<double>();
      t.hidden.seed = h.at("seed").get<std::uint64_t>();
      if (!seen.insert(t.trial_id).second) throw ValidationError("duplicate trial id \"" + t.trial_id + "\"");
      trials.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("invalid trial in bundle: ") + e.what());
    }
  }
  return trials;
}

std::vector<Trial> load_trials(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read trial bundle: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trials_json(buf.str());
}

ordered_json rater_payload(const Trial& trial, std::size_t index, std::size_t total) {
  return {{"trial_id", trial.trial_id},      {"question", trial.question},
          {"list_A", list_json(trial.list_a)}, {"list_B", list_json(trial.list_b)},
          {"probe_C", shown_json(trial.probe_c)}, {"index", index},
          {"total", total}};
}

std::vector<std::size_t> subject_trial_order(std::size_t n_trials, std::uint64_t seed, std::string_view subject_id) {
  std::vector<std::size_t> order(n_trials);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed ^ fnv1a(subject_id));
  shuffle(order, rng);
  return order;
}

// ---------------------------------------------------------------------------
// Responses

Response response_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("response must be a JSON object");
  auto str = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw ValidationError(std::string("response needs a non-empty string \"") + key + "\"");
    }
    return it->get<std::string>();
  };
  Response r;
  r.trial_id = str("trial_id");
  r.subject_id = str("subject_id");
  if (auto it = j.find("timestamp"); it != j.end()) {
    if (!it->is_string()) throw ValidationError("response \"timestamp\" must be a string");
    r.timestamp = it->get<std::string>();
  }
  auto answers = j.find("answers");
  if (answers == j.end() || !answers->is_object()) throw ValidationError("response needs an \"answers\" object");
  auto answer = [&](Question q) {
    const std::string key(to_string(q));
    auto it = answers->find(key);
    if (it == answers->end() || !it->is_string()) {
      throw ValidationError("response is missing the \"" + key + "\" answer");
    }
    return parse_list_label(it->get<std::string>());
  };
  r.answers.inclusion = answer(Question::Inclusion);
  r.answers.diversity = answer(Question::Diversity);
  r.answers.redundancy = answer(Question::Redundancy);
  if (answers->size() != 3) throw ValidationError("response answers must contain exactly the three questions");
  return r;
}

std::string response_to_jsonl(const Response& r) {
  ordered_json j{{"trial_id", r.trial_id},
                 {"subject_id", r.subject_id},
                 {"answers",
                  {{"inclusion", to_string(r.answers.inclusion)},
                   {"diversity", to_string(r.answers.diversity)},
                   {"redundancy", to_string(r.answers.redundancy)}}},
                 {"timestamp", r.timestamp}};
  return j.dump();
}

std::vector<Response> parse_responses(std::string_view text, const std::set<std::string>& known_trials) {
  std::vector<Response> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "responses line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": malformed JSON (" + e.what() + ")");
    }
    Response r;
    try {
      r = response_from_json(j);
    } catch (const ValidationError& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!known_trials.contains(r.trial_id)) {
      throw ValidationError(where + ": unknown trial_id \"" + r.trial_id + "\"");
    }
    if (!seen.emplace(r.subject_id, r.trial_id).second) {
      throw ValidationError(where + ": duplicate response from subject \"" + r.subject_id + "\" for trial \"" +
                            r.trial_id + "\"");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Response> ingest_responses(const std::filesystem::path& path, const std::set<std::string>& known_trials) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read response log: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_responses(buf.str(), known_trials);
}

std::set<std::string> trial_ids(const std::vector<Trial>& trials) {
  std::set<std::string> ids;
  for (const auto& t : trials) ids.insert(t.trial_id);
  return ids;
}

// ---------------------------------------------------------------------------
// Reports

AggregateReport aggregate(const std::vector<Trial>& trials, const std::vector<Response>& responses) {
  std::map<std::string_view, const Trial*> by_id;
  for (const auto& t : trials) by_id.emplace(t.trial_id, &t);
  std::map<std::pair<double, int>, AggregateRow> rows;
  for (const auto& r : responses) {
    auto it = by_id.find(r.trial_id);
    if (it == by_id.end()) throw ValidationError("response for unknown trial \"" + r.trial_id + "\"");
    const auto& hidden = it->second->hidden;
    for (auto q : all_questions()) {
      auto& row = rows[{hidden.lambda, static_cast<int>(q)}];
      row.lambda = hidden.lambda;
      row.question = q;
      ++row.trials;
      if (r.answers[q] == hidden.mmr_list) {
        ++row.chose_mmr;
      } else {
        ++row.chose_baseline;
      }
    }
  }
  AggregateReport report;
  for (auto& [key, row] : rows) report.rows.push_back(row);
  return report;
}

std::string aggregate_to_csv(const AggregateReport& report) {
  std::string out = "lambda,question,trials,frac_baseline,frac_mmr\n";
  for (const auto& row : report.rows) {
    out += csv::join({csv::format_real(row.lambda), std::string(to_string(row.question)), std::to_string(row.trials),
                      csv::format_real(row.frac_baseline()), csv::format_real(row.frac_mmr())});
    out += '\n';
  }
  return out;
}

const KappaCell* KappaReport::find(Question q, std::string_view subject, std::string_view other) const {
  for (const auto& c : cells) {
    if (c.question == q && c.subject == subject && c.other == other) return &c;
  }
  return nullptr;
}

KappaReport kappa_report(const std::vector<Response>& responses) {
  std::map<std::string, std::map<std::string, Answers>> sheets;  // subject -> trial -> answers
  for (const auto& r : responses) sheets[r.subject_id][r.trial_id] = r.answers;

  KappaReport report;
  for (auto q : all_questions()) {
    for (const auto& [subject, mine] : sheets) {
      for (const auto& [other, theirs] : sheets) {
        if (subject == other) continue;
        std::vector<ListLabel> r1, r2;
        for (const auto& [trial, answers] : mine) {
          if (auto it = theirs.find(trial); it != theirs.end()) {
            r1.push_back(answers[q]);
            r2.push_back(it->second[q]);
          }
        }
        KappaCell cell{q, subject, other, r1.size(), std::nullopt};
        if (!r1.empty()) cell.kappa = cohens_kappa(r1, r2);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

std::string kappa_to_csv(const KappaReport& report) {
  std::string out = "question,subject,other,kappa\n";
  for (const auto& c : report.cells) {
    out += csv::join({std::string(to_string(c.question)), c.subject, c.other,
                      c.kappa ? csv::format_real(*c.kappa) : std::string("NA")});
    out += '\n';
  }
  return out;
}

}  // namespace forumdiv
