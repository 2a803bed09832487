// Templated multi-channel corpus used in place of the public datasets. Scam
// and ham messages draw content words from disjoint banks, so a bag-of-pieces
// classifier can separate them.
#include <array>
#include <string>
#include <vector>

#include "vexa/corpus.hpp"
#include "vexa/rng.hpp"

namespace vexa {

namespace {

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& bank) {
  return bank[static_cast<std::size_t>(rng.below(N))];
}

std::string random_slug(Rng& rng, std::size_t len) {
  static constexpr std::string_view alphabet = "abcdefghijkmnpqrstuvwxyz23456789";
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

// Replaces each "{key}" with the value produced for it.
template <typename F>
std::string fill(std::string_view tmpl, F&& value_for) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      out += value_for(tmpl.substr(i + 1, close - i - 1));
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

constexpr std::array<std::string_view, 8> kUrgency = {
    "URGENT:", "Act now!", "Final notice:", "Immediately", "Expires today!!",
    "Last chance!", "Within 24 hours", "WARNING:"};

constexpr std::array<std::string_view, 8> kReward = {
    "you have won a {cur} prize",
    "claim your free {cur} gift card",
    "you were selected for a {cur} cash reward",
    "your bonus of {cur} is waiting",
    "you are our lucky lottery winner of {cur}",
    "a refund of {cur} is pending",
    "an exclusive {cur} voucher is reserved",
    "your account earned a {cur} jackpot"};

constexpr std::array<std::string_view, 7> kCurrency = {
    "$500", "$1000", "$250", "1000USD", "$75", "$2,500", "300GBP"};

constexpr std::array<std::string_view, 7> kScamAction = {
    "verify your account", "confirm your banking info", "click the link",
    "reply with your PIN", "pay the release fee", "enter your password",
    "unlock your payout"};

constexpr std::array<std::string_view, 4> kScamThreat = {
    "or your account will be suspended", "or the offer is cancelled",
    "before it expires", "to avoid penalty charges"};

std::string scam_url(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return "bit.ly/" + random_slug(rng, 6);
    case 1: return "tinyurl.com/" + random_slug(rng, 6);
    case 2: return "http://secure-" + random_slug(rng, 4) + ".info/login";
    default: return "www.claim-" + random_slug(rng, 4) + ".net/verify";
  }
}

constexpr std::array<std::string_view, 6> kScamSmsTemplates = {
    "{urgency} {reward}. {action} at {url} {threat}.",
    "{urgency} {reward}!! Visit {url} to {action}.",
    "Dear customer, {reward}. {action} now at {url} {threat}.",
    "{urgency} Your parcel is on hold. {action} at {url} {threat}.",
    "{reward}. To receive it, {action} via {url}. {urgency}",
    "{urgency} Suspicious login detected. {action} at {url} {threat}."};

constexpr std::array<std::string_view, 5> kScamEmailSubjects = {
    "Action Required: Verify Your Account", "Congratulations Winner!!",
    "Security Alert: Unusual Sign-In", "Your Refund Is Ready", "Invoice Overdue - Pay Immediately"};

constexpr std::array<std::string_view, 4> kScamEmailTemplates = {
    "Dear valued customer, {reward}. {urgency} Please {action} at {url} {threat}. "
    "Failure to respond will result in permanent suspension. Support Department",
    "We detected unusual activity on your account. {urgency} {action} using the secure "
    "link {url} {threat}. As a thank you, {reward}.",
    "Congratulations! {reward}. To release the funds, {action} and pay the processing "
    "fee at {url}. {urgency} This offer is confidential.",
    "Your mailbox storage is full. {urgency} {action} at {url} {threat}. "
    "Additionally, {reward}."};

constexpr std::array<std::string_view, 5> kScamSnsTemplates = {
    "{urgency} Crypto giveaway!! Send 0.1 BTC and {reward}. Details at {url}",
    "Get 10k free followers instantly! {action} at {url} {threat}.",
    "{reward}!! DM me or {action} at {url}. {urgency}",
    "Brand ambassador wanted, {reward}. {action} at {url} {threat}.",
    "{urgency} Your profile will be deleted for copyright violation. {action} at {url}."};

// Ham banks avoid every scam content word.
constexpr std::array<std::string_view, 8> kNames = {
    "Sam", "Priya", "Jordan", "Mei", "Luis", "Anna", "Omar", "Kate"};
constexpr std::array<std::string_view, 7> kDays = {
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
constexpr std::array<std::string_view, 6> kTimes = {"6pm", "noon", "7:30", "9am", "half past five", "eight"};
constexpr std::array<std::string_view, 8> kPlaces = {
    "the library", "the park", "grandma's house", "the gym", "the cafe on Elm street",
    "the office", "the soccer field", "the bakery"};
constexpr std::array<std::string_view, 7> kThings = {
    "milk", "the charger", "my umbrella", "the recipe book", "some bread", "the tickets",
    "your jacket"};
constexpr std::array<std::string_view, 6> kDocs = {
    "meeting notes", "project plan", "budget draft", "slides", "quarterly summary", "agenda"};
constexpr std::array<std::string_view, 6> kHobbies = {
    "gardening", "baking sourdough", "hiking", "painting", "reading mystery novels", "cycling"};

constexpr std::array<std::string_view, 7> kHamSmsTemplates = {
    "Hey, are we still meeting at {place} on {day}?",
    "Running a bit late, see you at {time}.",
    "Can you pick up {thing} on the way home?",
    "Thanks for dinner yesterday, {name}. It was lovely.",
    "Mom says hi. Call her when you have a minute.",
    "I left {thing} at {place}, could you grab it?",
    "Happy birthday {name}! Hope you have a great day."};

constexpr std::array<std::string_view, 5> kHamEmailSubjects = {
    "Notes from {day}", "Lunch plans", "Draft for review", "Team update", "Weekend trip"};

constexpr std::array<std::string_view, 5> kHamEmailTemplates = {
    "Hi team, I attached the {doc} from {day}. Please add comments before {day}. Thanks, {name}",
    "Hello {name}, thanks for the {doc}. I made a few edits and shared the new version. "
    "Let me know what you think. Best, {name}",
    "Hi all, our next sync moved to {day} at {time} in {place}. Bring the {doc}. Cheers, {name}",
    "Hey {name}, are you free for lunch on {day}? There is a new place near {place}.",
    "Hi {name}, photos from the hike are in the shared album. We should plan the next trip "
    "for {day}. See you soon"};

constexpr std::array<std::string_view, 6> kHamSnsTemplates = {
    "Loved the sunset at {place} today #weekend",
    "New blog post about {hobby} is up, feedback welcome",
    "Finally finished my first half marathon, so proud of the team",
    "Anyone have tips for {hobby}? Just getting started",
    "Throwback to {day} with {name} at {place}",
    "Coffee and a good book, perfect {day} morning"};

Message make_scam(Rng& rng, Channel channel, std::size_t index) {
  auto values = [&](std::string_view key) -> std::string {
    if (key == "urgency") return std::string(pick(rng, kUrgency));
    if (key == "reward") {
      return fill(pick(rng, kReward), [&](std::string_view) { return std::string(pick(rng, kCurrency)); });
    }
    if (key == "action") return std::string(pick(rng, kScamAction));
    if (key == "threat") return std::string(pick(rng, kScamThreat));
    if (key == "url") return scam_url(rng);
    return std::string(key);
  };
  Message m;
  m.channel = channel;
  m.label = Label::Scam;
  m.source = "synthetic";
  m.id = "synth-" + std::string(channel_name(channel)) + "-scam-" + std::to_string(index);
  switch (channel) {
    case Channel::SMS: m.body = fill(pick(rng, kScamSmsTemplates), values); break;
    case Channel::SNS: m.body = fill(pick(rng, kScamSnsTemplates), values); break;
    case Channel::Email:
      m.subject = std::string(pick(rng, kScamEmailSubjects));
      m.body = fill(pick(rng, kScamEmailTemplates), values);
      break;
  }
  return m;
}

Message make_ham(Rng& rng, Channel channel, std::size_t index) {
  auto values = [&](std::string_view key) -> std::string {
    if (key == "name") return std::string(pick(rng, kNames));
    if (key == "day") return std::string(pick(rng, kDays));
    if (key == "time") return std::string(pick(rng, kTimes));
    if (key == "place") return std::string(pick(rng, kPlaces));
    if (key == "thing") return std::string(pick(rng, kThings));
    if (key == "doc") return std::string(pick(rng, kDocs));
    if (key == "hobby") return std::string(pick(rng, kHobbies));
    return std::string(key);
  };
  Message m;
  m.channel = channel;
  m.label = Label::Ham;
  m.source = "synthetic";
  m.id = "synth-" + std::string(channel_name(channel)) + "-ham-" + std::to_string(index);
  switch (channel) {
    case Channel::SMS: m.body = fill(pick(rng, kHamSmsTemplates), values); break;
    case Channel::SNS: m.body = fill(pick(rng, kHamSnsTemplates), values); break;
    case Channel::Email:
      m.subject = fill(pick(rng, kHamEmailSubjects), values);
      m.body = fill(pick(rng, kHamEmailTemplates), values);
      break;
  }
  return m;
}

}  // namespace

MessageSet synth_corpus(std::uint64_t seed, std::size_t per_channel_per_label) {
  if (per_channel_per_label == 0) {
    throw Error(ErrorCode::InvalidArgument, "synth_corpus: count must be > 0");
  }
  Rng rng(seed);
  std::vector<Message> out;
  out.reserve(per_channel_per_label * 6);
  for (Channel c : kAllChannels) {
    for (std::size_t i = 0; i < per_channel_per_label; ++i) {
      out.push_back(make_scam(rng, c, i));
      out.push_back(make_ham(rng, c, i));
    }
  }
  return MessageSet(std::move(out));
}

}  // namespace vexa
