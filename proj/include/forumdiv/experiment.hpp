#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumdiv/corpus.hpp"
#include "forumdiv/embedding.hpp"
#include "forumdiv/error.hpp"
#include "forumdiv/random.hpp"

namespace forumdiv {

enum class ListLabel { A, B };
enum class Question { Inclusion, Diversity, Redundancy };

std::string_view to_string(ListLabel label);
std::string_view to_string(Question question);
ListLabel parse_list_label(std::string_view s);  // "A" or "B"
const std::vector<Question>& all_questions();

struct ShownComment {
  std::string comment_id;
  std::string text;

  friend bool operator==(const ShownComment&, const ShownComment&) = default;
};

/// Condition labels kept server-side only.
struct TrialHidden {
  ListLabel mmr_list = ListLabel::A;
  double lambda = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialHidden&, const TrialHidden&) = default;
};

struct Trial {
  std::string trial_id;
  std::string topic_id;
  std::string question;
  std::vector<ShownComment> list_a;
  std::vector<ShownComment> list_b;
  ShownComment probe_c;
  TrialHidden hidden;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct TrialConfig {
  std::size_t n_low = 75;
  std::size_t n_high = 25;
  double lambda_low = 0.25;
  double lambda_high = 0.75;
  std::size_t list_size = 5;
  std::uint64_t seed = 0;
  std::string model = "PCA+TFIDF";
};

struct TrialSet {
  std::vector<Trial> trials;
  std::vector<std::string> log;  // skipped draws, for audit
};

/// Builds n_low trials at lambda_low and n_high at lambda_high. Each trial
/// draws a topic uniformly with replacement, pairs its baseline and MMR top
/// lists in random A/B order, and adds a reply-weighted probe comment from
/// outside both lists. Draws whose lists coincide (or leave no probe
/// candidate) are logged and redrawn. Final order is shuffled.
TrialSet generate_trials(const Corpus& corpus, const SimilarityMatrix& sims, const TrialConfig& config);

struct ProbeCandidate {
  std::string comment_id;
  std::uint64_t reply_count = 0;
};

/// Draws a candidate with probability proportional to reply_count + 1.
std::string sample_probe(const std::vector<ProbeCandidate>& candidates, std::uint64_t seed);
std::string sample_probe(const std::vector<ProbeCandidate>& candidates, Rng& rng);

/// Full bundle including hidden labels (server-side file).
std::string trials_to_json(const std::vector<Trial>& trials);
std::vector<Trial> parse_trials_json(std::string_view text);
std::vector<Trial> load_trials(const std::filesystem::path& path);

/// Rater-facing payload; never contains hidden fields. index is 1-based.
nlohmann::ordered_json rater_payload(const Trial& trial, std::size_t index, std::size_t total);

/// Per-subject presentation order, derived from (seed, subject_id).
std::vector<std::size_t> subject_trial_order(std::size_t n_trials, std::uint64_t seed, std::string_view subject_id);

struct Answers {
  ListLabel inclusion = ListLabel::A;
  ListLabel diversity = ListLabel::A;
  ListLabel redundancy = ListLabel::A;

  ListLabel operator[](Question q) const;
  friend bool operator==(const Answers&, const Answers&) = default;
};

struct Response {
  std::string trial_id;
  std::string subject_id;
  Answers answers;
  std::string timestamp;

  friend bool operator==(const Response&, const Response&) = default;
};

/// Validates one response object. Throws ValidationError naming the problem.
Response response_from_json(const nlohmann::json& j);
/// One JSON-lines record (no trailing newline).
std::string response_to_jsonl(const Response& r);

/// Parses JSON-lines responses. Blank lines are skipped. Throws ParseError
/// with the line number for malformed lines, ValidationError for unknown
/// trial ids or a repeated (subject, trial).
std::vector<Response> parse_responses(std::string_view text, const std::set<std::string>& known_trials);
std::vector<Response> ingest_responses(const std::filesystem::path& path, const std::set<std::string>& known_trials);

std::set<std::string> trial_ids(const std::vector<Trial>& trials);

struct AggregateRow {
  double lambda = 0.0;
  Question question = Question::Inclusion;
  std::size_t trials = 0;
  std::size_t chose_baseline = 0;
  std::size_t chose_mmr = 0;

  double frac_baseline() const { return trials ? static_cast<double>(chose_baseline) / trials : 0.0; }
  double frac_mmr() const { return trials ? static_cast<double>(chose_mmr) / trials : 0.0; }
};

struct AggregateReport {
  std::vector<AggregateRow> rows;  // sorted by (lambda, question)
};

/// Unblinds every response and tallies baseline/MMR choices per
/// (lambda, question). For redundancy, picking the MMR list counts as MMR.
AggregateReport aggregate(const std::vector<Trial>& trials, const std::vector<Response>& responses);

/// `lambda,question,trials,frac_baseline,frac_mmr`
std::string aggregate_to_csv(const AggregateReport& report);

/// Cohen's kappa between two raters over the same items. When expected
/// agreement is 1 (both raters constant on the same category) returns 1 if
/// they agree everywhere, else 0.
template <typename T>
double cohens_kappa(const std::vector<T>& r1, const std::vector<T>& r2) {
  if (r1.size() != r2.size()) throw ParameterError("cohens_kappa: rating vectors differ in length");
  if (r1.empty()) throw ParameterError("cohens_kappa: need at least one rating");
  std::map<T, double> m1, m2;
  double agree = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    m1[r1[i]] += 1.0;
    m2[r2[i]] += 1.0;
    if (r1[i] == r2[i]) agree += 1.0;
  }
  const double n = static_cast<double>(r1.size());
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [category, count] : m1) {
    if (auto it = m2.find(category); it != m2.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

struct KappaCell {
  Question question = Question::Inclusion;
  std::string subject;
  std::string other;
  std::size_t shared_trials = 0;
  std::optional<double> kappa;  // absent when the pair shares no trials
};

struct KappaReport {
  std::vector<KappaCell> cells;  // every ordered subject pair, per question

  const KappaCell* find(Question q, std::string_view subject, std::string_view other) const;
};

KappaReport kappa_report(const std::vector<Response>& responses);

/// `question,subject,other,kappa` with kappa written as NA when absent.
std::string kappa_to_csv(const KappaReport& report);

}  // namespace forumdiv
