#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "forumdiv/error.hpp"
#include "forumdiv/experiment.hpp"
#include "support/synthetic.hpp"
#include "support/trials.hpp"

using namespace forumdiv;
using doctest::Approx;

namespace {

struct Fixture {
  Corpus corpus;
  SimilarityMatrix sims;
};

Fixture trial_fixture(std::uint64_t seed) {
  auto corpus = testing::clustered_corpus(8, 12, seed);
  auto sims = cosine_matrix(embed_corpus(corpus, EmbedConfig{ModelTag::Tfidf, std::nullopt, {}}));
  return {std::move(corpus), std::move(sims)};
}

bool contains(const std::vector<ShownComment>& list, const std::string& id) {
  return std::any_of(list.begin(), list.end(), [&](const ShownComment& c) { return c.comment_id == id; });
}

// Collects every object key anywhere in a JSON document.
void collect_keys(const nlohmann::ordered_json& j, std::vector<std::string>& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      out.push_back(key);
      collect_keys(value, out);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_keys(v, out);
  }
}

}  // namespace

TEST_CASE("generate_trials: counts and invariants") {
  const auto fx = trial_fixture(3);
  const auto set = generate_trials(fx.corpus, fx.sims, TrialConfig{75, 25, 0.25, 0.75, 5, 11, "TFIDF"});
  REQUIRE(set.trials.size() == 100);
  std::size_t low = 0;
  std::set<std::string> ids;
  for (const auto& t : set.trials) {
    low += t.hidden.lambda == 0.25;
    CHECK((t.hidden.lambda == 0.25 || t.hidden.lambda == 0.75));
    ids.insert(t.trial_id);
    CHECK(t.list_a.size() == 5);
    CHECK(t.list_b.size() == 5);
    CHECK(t.list_a != t.list_b);
    CHECK_FALSE(contains(t.list_a, t.probe_c.comment_id));
    CHECK_FALSE(contains(t.list_b, t.probe_c.comment_id));
    const auto* topic = fx.corpus.find_topic(t.topic_id);
    REQUIRE(topic != nullptr);
    CHECK(t.question == topic->question);
    CHECK(t.probe_c.text == fx.corpus.comment(t.probe_c.comment_id).text);
  }
  CHECK(low == 75);
  CHECK(ids.size() == 100);
  CHECK(set.trials.front().trial_id == "trial-001");
  CHECK(set.trials.back().trial_id == "trial-100");
}

TEST_CASE("generate_trials: same seed gives identical bytes") {
  const auto fx = trial_fixture(4);
  const TrialConfig cfg{20, 10, 0.25, 0.75, 5, 99, "TFIDF"};
  const auto a = generate_trials(fx.corpus, fx.sims, cfg);
  const auto b = generate_trials(fx.corpus, fx.sims, cfg);
  CHECK(trials_to_json(a.trials) == trials_to_json(b.trials));
  CHECK(a.log == b.log);
  auto other = cfg;
  other.seed = 100;
  CHECK(trials_to_json(generate_trials(fx.corpus, fx.sims, other).trials) != trials_to_json(a.trials));
}

TEST_CASE("generate_trials: six-comment topic forces the probe") {
  // c1..c5 outscore c6. c1 is close to c2 and c6, so at lambda 0.25 MMR
  // reorders the top five but keeps c6 last.
  TopicRecord topic{"six", "Six comments?", {}};
  const std::vector<std::uint64_t> replies{10, 9, 8, 7, 6, 0};
  for (std::size_t i = 0; i < 6; ++i) {
    topic.comments.push_back({"c" + std::to_string(i + 1), "comment " + std::to_string(i + 1), replies[i]});
  }
  Corpus corpus({topic}, testing::plain_tokenizer());
  SimilarityMatrix sims{Matrix(6, 6, 0.0), corpus.comment_ids()};
  for (std::size_t i = 0; i < 6; ++i) sims.values(i, i) = 1.0;
  sims.values(0, 1) = sims.values(1, 0) = 0.9;
  sims.values(0, 5) = sims.values(5, 0) = 0.95;

  const auto set = generate_trials(corpus, sims, TrialConfig{4, 0, 0.25, 0.75, 5, 1, "TFIDF"});
  REQUIRE(set.trials.size() == 4);
  for (const auto& t : set.trials) CHECK(t.probe_c.comment_id == "c6");

  // At lambda 1 the two lists coincide, so no trial can be built.
  CHECK_THROWS_AS(generate_trials(corpus, sims, TrialConfig{0, 1, 0.25, 1.0, 5, 1, "TFIDF"}), ParameterError);
}

TEST_CASE("generate_trials: skipped topics are logged once") {
  TopicRecord same{"same", "Same lists", {}};
  for (std::size_t i = 0; i < 6; ++i) {
    same.comments.push_back({"s" + std::to_string(i), "alpha beta", 10 - i});
  }
  TopicRecord split{"split", "Split lists", {}};
  for (std::size_t i = 0; i < 7; ++i) {
    split.comments.push_back({"p" + std::to_string(i), "gamma delta", 10 - i});
  }
  Corpus corpus({same, split}, testing::plain_tokenizer());
  const auto ids = corpus.comment_ids();
  SimilarityMatrix sims{Matrix(ids.size(), ids.size(), 0.0), ids};
  // Within "split", p0 and p1 are near duplicates; "same" has no structure.
  sims.values(corpus.require_index("p0"), corpus.require_index("p1")) = 0.99;
  sims.values(corpus.require_index("p1"), corpus.require_index("p0")) = 0.99;

  const auto set = generate_trials(corpus, sims, TrialConfig{30, 0, 0.25, 0.75, 5, 8, "TFIDF"});
  CHECK(set.trials.size() == 30);
  for (const auto& t : set.trials) CHECK(t.topic_id == "split");
  REQUIRE(set.log.size() == 1);
  CHECK(set.log[0].find("same") != std::string::npos);
}

TEST_CASE("generate_trials: errors") {
  TopicRecord small{"small", "?", {{"a", "x y", 1}, {"b", "x y", 2}}};
  Corpus corpus({small}, testing::plain_tokenizer());
  SimilarityMatrix sims{Matrix(2, 2, 1.0), corpus.comment_ids()};
  CHECK_THROWS_AS(generate_trials(corpus, sims, TrialConfig{}), ParameterError);
  CHECK(generate_trials(corpus, sims, TrialConfig{0, 0, 0.25, 0.75, 5, 0, "TFIDF"}).trials.empty());
}

TEST_CASE("sample_probe: weights follow reply_count + 1") {
  CHECK(sample_probe({{"only", 0}}, 5) == "only");
  CHECK_THROWS_AS(sample_probe({}, 5), ParameterError);

  Rng rng(12345);
  std::size_t first = 0;
  const std::size_t draws = 10000;
  for (std::size_t i = 0; i < draws; ++i) first += sample_probe({{"x", 3}, {"y", 0}}, rng) == "x";
  const double ratio = static_cast<double>(first) / static_cast<double>(draws - first);
  CHECK(ratio == Approx(4.0).epsilon(0.05));
  CHECK(static_cast<double>(first) / draws == Approx(0.8).epsilon(0.05));
}

TEST_CASE("sample_probe: equal weights pass a chi-square test") {
  const std::vector<ProbeCandidate> cands{{"a", 7}, {"b", 7}, {"c", 7}, {"d", 7}, {"e", 7}};
  std::map<std::string, double> counts;
  Rng rng(8);
  const double draws = 10000;
  for (int i = 0; i < 10000; ++i) counts[sample_probe(cands, rng)] += 1;
  double chi2 = 0.0;
  for (const auto& c : cands) {
    const double expected = draws / 5.0;
    chi2 += (counts[c.comment_id] - expected) * (counts[c.comment_id] - expected) / expected;
  }
  // Critical value for 4 degrees of freedom at alpha = 0.01.
  CHECK(chi2 < 13.277);
}

TEST_CASE("trial bundle round trip and blinding") {
  const auto fx = trial_fixture(6);
  const auto set = generate_trials(fx.corpus, fx.sims, TrialConfig{6, 4, 0.25, 0.75, 5, 3, "TFIDF"});
  CHECK(parse_trials_json(trials_to_json(set.trials)) == set.trials);

  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    const auto payload = rater_payload(set.trials[i], i + 1, set.trials.size());
    std::vector<std::string> top;
    for (const auto& [key, value] : payload.items()) top.push_back(key);
    CHECK(top == std::vector<std::string>{"trial_id", "question", "list_A", "list_B", "probe_C", "index", "total"});
    std::vector<std::string> keys;
    collect_keys(payload, keys);
    for (const char* banned : {"hidden", "mmr_list", "lambda", "seed", "model"}) {
      CHECK(std::find(keys.begin(), keys.end(), banned) == keys.end());
    }
    const auto dumped = payload.dump();
    CHECK(dumped.find("MMR") == std::string::npos);
    CHECK(dumped.find("baseline") == std::string::npos);
    CHECK(payload["index"] == i + 1);
  }
}

TEST_CASE("parse_trials_json rejects malformed bundles") {
  CHECK_THROWS_AS(parse_trials_json("{"), ParseError);
  CHECK_THROWS_AS(parse_trials_json("{}"), ValidationError);
  CHECK_THROWS_AS(parse_trials_json(R"([{"trial_id": "t1"}])"), ValidationError);
}

TEST_CASE("subject_trial_order is a seeded permutation per subject") {
  const auto a = subject_trial_order(20, 7, "alice");
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 20; ++i) CHECK(sorted[i] == i);
  CHECK(subject_trial_order(20, 7, "alice") == a);
  CHECK(subject_trial_order(20, 7, "bob") != a);
  CHECK(subject_trial_order(20, 8, "alice") != a);
}

TEST_CASE("responses: parsing and validation") {
  const std::set<std::string> known{"t1", "t7"};
  CHECK(parse_responses("", known).empty());
  CHECK(parse_responses("\n  \n", known).empty());

  const auto r = testing::make_response("t7", "s1", ListLabel::A, ListLabel::B, ListLabel::A);
  const auto line = response_to_jsonl(r);
  CHECK(line.find('\n') == std::string::npos);
  const auto parsed = parse_responses(line + "\n", known);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == r);

  try {
    parse_responses(line + "\n" + line + "\n", known);
    FAIL("duplicate accepted");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("s1") != std::string::npos);
    CHECK(msg.find("t7") != std::string::npos);
  }

  auto stranger = r;
  stranger.trial_id = "t99";
  CHECK_THROWS_AS(parse_responses(response_to_jsonl(stranger), known), ValidationError);

  try {
    parse_responses(line + "\n\n{not json\n", known);
    FAIL("malformed line accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_responses(R"({"trial_id":"t1","subject_id":"s","answers":{"inclusion":"A","diversity":"B"}})",
                                  known),
                  ParseError);
  CHECK_THROWS_AS(
      parse_responses(R"({"trial_id":"t1","subject_id":"s","answers":{"inclusion":"A","diversity":"B","redundancy":"C"}})",
                      known),
      ParseError);
}

TEST_CASE("ingest_responses reads files") {
  const auto dir = std::filesystem::temp_directory_path() / "forumdiv_test_ingest";
  std::filesystem::create_directories(dir);
  const auto path = dir / "responses.jsonl";
  { std::ofstream(path) << ""; }
  CHECK(ingest_responses(path, {"t1"}).empty());

  std::vector<Trial> trials;
  std::string text;
  for (int t = 0; t < 100; ++t) {
    trials.push_back(testing::make_trial("trial-" + std::to_string(t), 0.25, ListLabel::A));
    for (const char* s : {"s1", "s2", "s3"}) {
      text += response_to_jsonl(testing::make_response(trials.back().trial_id, s, ListLabel::A, ListLabel::B,
                                                       ListLabel::A)) +
              "\n";
    }
  }
  { std::ofstream(path) << text; }
  CHECK(ingest_responses(path, trial_ids(trials)).size() == 300);
  CHECK_THROWS(ingest_responses(dir / "missing.jsonl", {}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("aggregate: tallies and unblinding") {
  using L = ListLabel;
  std::vector<Trial> trials{testing::make_trial("t1", 0.75, L::A), testing::make_trial("t2", 0.75, L::B),
                            testing::make_trial("t3", 0.75, L::A), testing::make_trial("t4", 0.75, L::B)};
  // Inclusion answers pick MMR on t1, t2, t3 and baseline on t4.
  std::vector<Response> responses{testing::make_response("t1", "s", L::A, L::A, L::A),
                                  testing::make_response("t2", "s", L::B, L::A, L::A),
                                  testing::make_response("t3", "s", L::A, L::A, L::A),
                                  testing::make_response("t4", "s", L::A, L::A, L::A)};
  const auto report = aggregate(trials, responses);
  REQUIRE(report.rows.size() == 3);
  const auto& inc = report.rows[0];
  CHECK(inc.lambda == 0.75);
  CHECK(inc.question == Question::Inclusion);
  CHECK(inc.trials == 4);
  CHECK(inc.frac_mmr() == 0.75);
  CHECK(inc.frac_baseline() == 0.25);
  // Always answering A picks MMR exactly where MMR sits in A.
  CHECK(report.rows[1].frac_mmr() == 0.5);
  CHECK(report.rows[2].question == Question::Redundancy);

  std::vector<Response> baseline_only;
  for (const auto& t : trials) {
    const L base = t.hidden.mmr_list == L::A ? L::B : L::A;
    baseline_only.push_back(testing::make_response(t.trial_id, "s", base, base, base));
  }
  for (const auto& row : aggregate(trials, baseline_only).rows) {
    CHECK(row.frac_mmr() == 0.0);
    CHECK(row.frac_baseline() == 1.0);
  }

  CHECK_THROWS_AS(aggregate(trials, {testing::make_response("zz", "s", L::A, L::A, L::A)}), ValidationError);
}

TEST_CASE("aggregate: rows are ordered by lambda then question and sum to one") {
  using L = ListLabel;
  std::vector<Trial> trials{testing::make_trial("hi", 0.75, L::A), testing::make_trial("lo", 0.25, L::B)};
  std::vector<Response> responses;
  for (const char* s : {"s1", "s2", "s3"}) {
    responses.push_back(testing::make_response("hi", s, L::A, L::B, L::A));
    responses.push_back(testing::make_response("lo", s, L::B, L::B, L::A));
  }
  const auto report = aggregate(trials, responses);
  REQUIRE(report.rows.size() == 6);
  CHECK(report.rows[0].lambda == 0.25);
  CHECK(report.rows[3].lambda == 0.75);
  for (const auto& row : report.rows) {
    CHECK(row.chose_baseline + row.chose_mmr == row.trials);
    CHECK(row.trials == 3);
  }
  const auto csv = aggregate_to_csv(report);
  CHECK(csv.rfind("lambda,question,trials,frac_baseline,frac_mmr\n", 0) == 0);
  CHECK(csv.find("0.25,inclusion,3,0,1\n") != std::string::npos);
  CHECK(aggregate_to_csv(AggregateReport{}) == "lambda,question,trials,frac_baseline,frac_mmr\n");
}

TEST_CASE("cohens_kappa examples") {
  using L = ListLabel;
  CHECK(cohens_kappa(std::vector<L>{L::A, L::B, L::A}, std::vector<L>{L::A, L::B, L::A}) == 1.0);
  CHECK(cohens_kappa(std::vector<L>{L::A, L::B, L::A, L::B}, std::vector<L>{L::B, L::A, L::B, L::A}) == -1.0);
  CHECK(cohens_kappa(std::vector<L>{L::A, L::A, L::A, L::B}, std::vector<L>{L::A, L::A, L::B, L::B}) ==
        Approx(0.5));
  CHECK(cohens_kappa(std::vector<L>{L::A, L::A}, std::vector<L>{L::A, L::A}) == 1.0);
  CHECK(cohens_kappa(std::vector<L>{L::A, L::A}, std::vector<L>{L::B, L::B}) == 0.0);
  CHECK_THROWS_AS(cohens_kappa(std::vector<L>{L::A}, std::vector<L>{L::A, L::B}), ParameterError);
  CHECK_THROWS_AS(cohens_kappa(std::vector<L>{}, std::vector<L>{}), ParameterError);
}

TEST_CASE("cohens_kappa matches the 2x2 formula and is symmetric") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + uniform_index(rng, 40);
    const double bias1 = uniform01(rng), bias2 = uniform01(rng);
    std::vector<ListLabel> r1, r2;
    for (std::size_t k = 0; k < n; ++k) {
      r1.push_back(uniform01(rng) < bias1 ? ListLabel::A : ListLabel::B);
      r2.push_back(uniform01(rng) < bias2 ? ListLabel::A : ListLabel::B);
    }
    const double k12 = cohens_kappa(r1, r2);
    CHECK(k12 == cohens_kappa(r2, r1));
    CHECK(k12 == Approx(testing::binary_kappa(r1, r2)).epsilon(1e-12));
    CHECK(k12 >= -1.0);
    CHECK(k12 <= 1.0);
  }
}

TEST_CASE("kappa_report") {
  using L = ListLabel;
  std::vector<Response> same;
  for (int t = 0; t < 6; ++t) {
    const L x = t % 2 ? L::A : L::B;
    const L y = t % 3 ? L::A : L::B;
    for (const char* s : {"s1", "s2"}) same.push_back(testing::make_response("t" + std::to_string(t), s, x, y, x));
  }
  const auto report = kappa_report(same);
  CHECK(report.cells.size() == 6);
  for (const auto& cell : report.cells) {
    REQUIRE(cell.kappa.has_value());
    CHECK(*cell.kappa == 1.0);
    CHECK(cell.shared_trials == 6);
  }
  REQUIRE(report.find(Question::Diversity, "s2", "s1") != nullptr);
  CHECK(report.find(Question::Diversity, "s2", "s2") == nullptr);

  std::vector<Response> disjoint{testing::make_response("t1", "s1", L::A, L::A, L::A),
                                 testing::make_response("t2", "s2", L::A, L::A, L::A)};
  const auto empty = kappa_report(disjoint);
  CHECK(empty.cells.size() == 6);
  for (const auto& cell : empty.cells) CHECK_FALSE(cell.kappa.has_value());
  const auto csv = kappa_to_csv(empty);
  CHECK(csv.rfind("question,subject,other,kappa\n", 0) == 0);
  CHECK(csv.find("inclusion,s1,s2,NA\n") != std::string::npos);
}
