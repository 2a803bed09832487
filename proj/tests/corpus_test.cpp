#include <algorithm>
#include <numeric>
#include <regex>
#include <set>

#include "doctest.h"
#include "vexa/corpus.hpp"
#include "vexa/rng.hpp"
#include "vexa/text.hpp"

using namespace vexa;
using nlohmann::json;

namespace {

MessageSet balanced_set(std::size_t per_stratum) {
  std::vector<Message> msgs;
  for (Channel c : kAllChannels) {
    for (Label l : {Label::Scam, Label::Ham}) {
      for (std::size_t i = 0; i < per_stratum; ++i) {
        Message m;
        m.channel = c;
        m.label = l;
        m.body = "message number " + std::to_string(i);
        m.id = std::string(channel_name(c)) + "-" + std::string(label_name(l)) + "-" + std::to_string(i);
        msgs.push_back(m);
      }
    }
  }
  return MessageSet(std::move(msgs));
}

std::vector<std::string> ids_of(const MessageSet& s) {
  std::vector<std::string> out;
  for (const auto& m : s.messages()) out.push_back(m.id);
  return out;
}

}  // namespace

TEST_CASE("ingest maps fields and labels") {
  auto set = ingest({json{{"body", "Win cash now"}, {"label", "spam"}}}, Channel::SMS, "uci");
  REQUIRE(set.size() == 1);
  const auto& m = set.messages()[0];
  CHECK(m.channel == Channel::SMS);
  CHECK(m.label == Label::Scam);
  CHECK(m.body == "Win cash now");
  CHECK_FALSE(m.subject);
  CHECK(m.id == "uci-sms-0");

  auto email = ingest({json{{"subject", "Invoice"}, {"body", "Pay today"}, {"label", "ham"}}},
                      Channel::Email);
  CHECK(email.messages()[0].subject.value() == "Invoice");
  CHECK(email.messages()[0].body == "Pay today");
  CHECK(email.messages()[0].label == Label::Ham);
}

TEST_CASE("ingest drops subjects on non-email channels") {
  auto set = ingest({json{{"subject", "x"}, {"body", "hello"}, {"label", "HAM"}}}, Channel::SNS);
  CHECK_FALSE(set.messages()[0].subject);
}

TEST_CASE("ingest rejects malformed records") {
  auto code_of = [](const std::vector<json>& recs) {
    try {
      ingest(recs, Channel::SMS);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of({json{{"label", "spam"}}}) == ErrorCode::MissingField);
  CHECK(code_of({json{{"body", "   "}, {"label", "spam"}}}) == ErrorCode::MissingField);
  CHECK(code_of({json{{"body", "hi"}}}) == ErrorCode::MissingField);
  CHECK(code_of({json{{"body", "hi"}, {"label", "maybe"}}}) == ErrorCode::InvalidLabel);
  CHECK(code_of({json{{"id", "a"}, {"body", "hi"}, {"label", "ham"}},
                 json{{"id", "a"}, {"body", "yo"}, {"label", "ham"}}}) == ErrorCode::DuplicateId);
}

TEST_CASE("format_input prepends the channel marker") {
  Message sms{.id = "1", .channel = Channel::SMS, .subject = {}, .body = "Win now"};
  CHECK(format_input(sms).text == "<SMS> Win now");
  CHECK(format_input(sms).channel_marker == "<SMS>");

  Message email{.id = "2", .channel = Channel::Email, .subject = "Invoice", .body = "Pay"};
  CHECK(format_input(email).text == "<Email> Invoice\nPay");

  Message sns{.id = "3", .channel = Channel::SNS, .subject = {}, .body = "free followers"};
  CHECK(format_input(sns).text == "<SNS> free followers");
}

TEST_CASE("format_input over ingest preserves count and is deterministic") {
  const auto corpus = synth_corpus(3, 20);
  std::vector<std::string> a, b;
  for (const auto& m : corpus.messages()) a.push_back(format_input(m).text);
  for (const auto& m : corpus.messages()) b.push_back(format_input(m).text);
  CHECK(a.size() == corpus.size());
  CHECK(a == b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto marker = std::string(channel_marker(corpus.messages()[i].channel));
    CHECK(a[i].rfind(marker + " ", 0) == 0);
  }
}

TEST_CASE("stratified_sample draws equal strata deterministically") {
  const auto set = balanced_set(500);
  const auto s1 = stratified_sample(set, 100, 42);
  const auto s2 = stratified_sample(set, 100, 42);
  for (Channel c : kAllChannels) {
    CHECK(s1.counts().at(c).scam == 100);
    CHECK(s1.counts().at(c).ham == 100);
  }
  CHECK(ids_of(s1) == ids_of(s2));
  CHECK(ids_of(stratified_sample(set, 100, 43)) != ids_of(s1));

  CHECK_THROWS_AS(stratified_sample(set, 600, 42), Error);
  try {
    stratified_sample(set, 600, 42);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("stratified_sample keeps scam and ham counts equal for random sizes") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<std::size_t>(1 + rng.below(30));
    const auto set = balanced_set(30);
    const auto s = stratified_sample(set, n, rng.next());
    for (const auto& [c, cnt] : s.counts()) CHECK(cnt.scam == cnt.ham);
  }
}

TEST_CASE("truncate_front keeps the most recent tokens") {
  std::vector<int> tokens(600);
  std::iota(tokens.begin(), tokens.end(), 1);
  const auto kept = truncate_front(tokens, 512);
  REQUIRE(kept.size() == 512);
  CHECK(kept.front() == 89);
  CHECK(kept.back() == 600);

  std::vector<int> small(10, 3);
  CHECK(truncate_front(small, 512) == small);
  std::vector<int> exact(512, 1);
  CHECK(truncate_front(exact, 512) == exact);
  CHECK_THROWS_AS(truncate_front(small, 0), Error);
}

TEST_CASE("truncate_front is idempotent") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> tokens(rng.below(40));
    for (auto& t : tokens) t = rng.next();
    const std::size_t limit = 1 + rng.below(40);
    const auto once = truncate_front(tokens, limit);
    CHECK(truncate_front(once, limit) == once);
  }
}

TEST_CASE("filter_for_explanation keeps correctly classified scams only") {
  std::string long_body;
  for (int i = 0; i < 2000; ++i) long_body += "w" + std::to_string(i) + " ";
  std::vector<Message> msgs = {
      {.id = "missed", .channel = Channel::SMS, .subject = {}, .body = "win a prize", .label = Label::Scam},
      {.id = "ham", .channel = Channel::SMS, .subject = {}, .body = "lunch?", .label = Label::Ham},
      {.id = "long", .channel = Channel::Email, .subject = "s", .body = long_body, .label = Label::Scam},
      {.id = "foreign", .channel = Channel::SNS, .subject = {},
       .body = "\xe4\xbd\xa0\xe5\xa5\xbd\xe4\xb8\x96\xe7\x95\x8c\xe4\xbd\xa0\xe5\xa5\xbd", .label = Label::Scam},
      {.id = "ok", .channel = Channel::SNS, .subject = {}, .body = "free followers at bit.ly/x", .label = Label::Scam},
  };
  const MessageSet set(msgs);
  std::map<std::string, Label> pred = {
      {"missed", Label::Ham}, {"ham", Label::Ham}, {"long", Label::Scam},
      {"foreign", Label::Scam}, {"ok", Label::Scam}};
  const auto out = filter_for_explanation(set, pred);
  CHECK(ids_of(out) == std::vector<std::string>{"long", "ok"});
  const auto words = text::split_whitespace(out.messages()[0].body);
  REQUIRE(words.size() == 1500);
  CHECK(words.front() == "w500");
  CHECK(words.back() == "w1999");

  pred.erase("ok");
  try {
    filter_for_explanation(set, pred);
    FAIL("expected MissingPrediction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingPrediction);
  }
}

TEST_CASE("filter_for_explanation output is a scam-only subset") {
  const auto corpus = synth_corpus(9, 30);
  Rng rng(9);
  std::map<std::string, Label> pred;
  for (const auto& m : corpus.messages()) pred[m.id] = rng.below(2) ? Label::Scam : Label::Ham;
  const auto out = filter_for_explanation(corpus, pred);
  std::set<std::string> input_ids;
  for (const auto& m : corpus.messages()) input_ids.insert(m.id);
  for (const auto& m : out.messages()) {
    CHECK(input_ids.contains(m.id));
    CHECK(m.label == Label::Scam);
  }
}

TEST_CASE("looks_english uses a 90 percent ASCII threshold") {
  CHECK(looks_english("Click here to claim your prize!"));
  CHECK(looks_english("caf\xc3\xa9 au lait with friends"));  // one accent among many ASCII
  CHECK_FALSE(looks_english("\xd0\x9f\xd1\x80\xd0\xb8\xd0\xb2\xd0\xb5\xd1\x82"));
  CHECK_FALSE(looks_english(""));
}

TEST_CASE("synth_corpus is sized and deterministic") {
  const auto a = synth_corpus(7, 100);
  const auto b = synth_corpus(7, 100);
  CHECK(a.size() == 600);
  for (Channel c : kAllChannels) {
    CHECK(a.counts().at(c).scam == 100);
    CHECK(a.counts().at(c).ham == 100);
  }
  std::string dump_a, dump_b;
  for (const auto& m : a.messages()) dump_a += to_json(m).dump() + "\n";
  for (const auto& m : b.messages()) dump_b += to_json(m).dump() + "\n";
  CHECK(dump_a == dump_b);
  CHECK(synth_corpus(8, 100).messages()[0].body != a.messages()[0].body);
}

TEST_CASE("every synthetic scam carries a scam cue") {
  // Independent scan: urgency and reward terms are listed here, not taken
  // from the generator.
  const std::regex urgency(R"(urgent|act now|final notice|immediately|expires|last chance|24 hours|warning)",
                           std::regex::icase);
  const std::regex reward(R"(won|free|reward|bonus|lottery|refund|voucher|jackpot|prize|gift)",
                          std::regex::icase);
  const auto corpus = synth_corpus(7, 100);
  std::size_t scams = 0;
  for (const auto& m : corpus.messages()) {
    if (m.label != Label::Scam) continue;
    ++scams;
    const auto full = m.subject.value_or("") + " " + m.body;
    bool url = false, currency = false;
    for (const auto& w : text::split_whitespace(full)) {
      url |= text::is_url_like(w);
      currency |= text::is_currency(w);
    }
    const bool cue = url || currency || std::regex_search(full, urgency) || std::regex_search(full, reward);
    CHECK_MESSAGE(cue, m.body);
  }
  CHECK(scams == 300);
}

TEST_CASE("synthetic corpus passes the English filter") {
  const auto corpus = synth_corpus(7, 50);
  for (const auto& m : corpus.messages()) {
    CHECK(looks_english(m.subject.value_or("") + " " + m.body));
  }
}

TEST_CASE("jsonl round trip preserves the message set") {
  const auto corpus = synth_corpus(1, 5);
  const auto path = std::filesystem::temp_directory_path() / "vexa_corpus_test.jsonl";
  save_messages(path, corpus);
  const auto loaded = load_messages(path);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(to_json(loaded.messages()[i]).dump() == to_json(corpus.messages()[i]).dump());
  }
  std::filesystem::remove(path);
}
