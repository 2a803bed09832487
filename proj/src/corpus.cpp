#include "vexa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "vexa/rng.hpp"
#include "vexa/text.hpp"

namespace vexa {

namespace {

std::optional<std::string> string_field(const RawRecord& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

Message message_from_record(const RawRecord& record, Channel channel, std::size_t index,
                            std::string_view default_source) {
  if (!record.is_object()) {
    throw Error(ErrorCode::MissingField, "record " + std::to_string(index) + " is not an object");
  }
  auto body = string_field(record, "body");
  if (!body || text::trim(*body).empty()) {
    throw Error(ErrorCode::MissingField, "record " + std::to_string(index) + " has no body");
  }
  auto label = string_field(record, "label");
  if (!label) {
    throw Error(ErrorCode::MissingField, "record " + std::to_string(index) + " has no label");
  }

  Message m;
  m.channel = channel;
  m.body = std::move(*body);
  m.label = parse_label(*label);
  m.source = string_field(record, "source").value_or(std::string(default_source));
  if (channel == Channel::Email) {
    auto subject = string_field(record, "subject");
    if (subject && !text::trim(*subject).empty()) m.subject = std::move(*subject);
  }
  m.id = string_field(record, "id").value_or(m.source + "-" + std::string(channel_name(channel)) +
                                             "-" + std::to_string(index));
  return m;
}

}  // namespace

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Email: return "email";
    case Channel::SMS: return "sms";
    case Channel::SNS: return "sns";
  }
  return "sms";
}

std::string_view channel_marker(Channel c) {
  switch (c) {
    case Channel::Email: return "<Email>";
    case Channel::SMS: return "<SMS>";
    case Channel::SNS: return "<SNS>";
  }
  return "<SMS>";
}

Channel parse_channel(std::string_view name) {
  const std::string lower = text::ascii_lower(text::trim(name));
  if (lower == "email") return Channel::Email;
  if (lower == "sms") return Channel::SMS;
  if (lower == "sns") return Channel::SNS;
  throw Error(ErrorCode::InvalidArgument, "unknown channel '" + std::string(name) + "'");
}

std::optional<Channel> channel_from_marker(std::string_view token) {
  for (Channel c : kAllChannels) {
    if (channel_marker(c) == token) return c;
  }
  return std::nullopt;
}

std::string_view label_name(Label l) { return l == Label::Scam ? "scam" : "ham"; }

Label parse_label(std::string_view name) {
  const std::string lower = text::ascii_lower(text::trim(name));
  if (lower == "spam" || lower == "scam") return Label::Scam;
  if (lower == "ham") return Label::Ham;
  throw Error(ErrorCode::InvalidLabel, "label '" + std::string(name) + "' is not spam/scam/ham");
}

MessageSet::MessageSet(std::vector<Message> messages) : messages_(std::move(messages)) {
  std::set<std::string> seen;
  for (const auto& m : messages_) {
    if (text::trim(m.body).empty()) {
      throw Error(ErrorCode::MissingField, "message '" + m.id + "' has an empty body");
    }
    if (m.subject && m.channel != Channel::Email) {
      throw Error(ErrorCode::InvalidArgument, "message '" + m.id + "' has a subject but is not email");
    }
    if (!seen.insert(m.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate message id '" + m.id + "'");
    }
    auto& c = counts_[m.channel];
    (m.label == Label::Scam ? c.scam : c.ham) += 1;
  }
}

MessageSet ingest(const std::vector<RawRecord>& records, Channel channel,
                  std::string_view default_source) {
  std::vector<Message> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(message_from_record(records[i], channel, i, default_source));
  }
  return MessageSet(std::move(out));
}

FormattedText format_input(const Message& message) {
  FormattedText f;
  f.channel_marker = std::string(channel_marker(message.channel));
  f.text = f.channel_marker + " ";
  if (message.channel == Channel::Email && message.subject) {
    f.text += *message.subject;
    f.text += '\n';
  }
  f.text += message.body;
  return f;
}

MessageSet stratified_sample(const MessageSet& set, std::size_t per_channel_per_label,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> selected;
  const auto& msgs = set.messages();
  for (Channel c : kAllChannels) {
    if (!set.counts().contains(c)) continue;
    for (Label l : {Label::Scam, Label::Ham}) {
      std::vector<std::size_t> stratum;
      for (std::size_t i = 0; i < msgs.size(); ++i) {
        if (msgs[i].channel == c && msgs[i].label == l) stratum.push_back(i);
      }
      if (stratum.size() < per_channel_per_label) {
        throw Error(ErrorCode::InsufficientData,
                    std::string(channel_name(c)) + "/" + std::string(label_name(l)) + " has " +
                        std::to_string(stratum.size()) + " messages, need " +
                        std::to_string(per_channel_per_label));
      }
      rng.shuffle(std::span<std::size_t>(stratum));
      selected.insert(selected.end(), stratum.begin(),
                      stratum.begin() + static_cast<std::ptrdiff_t>(per_channel_per_label));
    }
  }
  std::sort(selected.begin(), selected.end());
  std::vector<Message> out;
  out.reserve(selected.size());
  for (auto i : selected) out.push_back(msgs[i]);
  return MessageSet(std::move(out));
}

MessageSet sample_fraction_per_channel(const MessageSet& set, double fraction,
                                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample fraction must be in (0, 1]");
  }
  Rng rng(seed);
  std::vector<std::size_t> selected;
  const auto& msgs = set.messages();
  for (Channel c : kAllChannels) {
    std::vector<std::size_t> stratum;
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      if (msgs[i].channel == c && msgs[i].label == Label::Scam) stratum.push_back(i);
    }
    if (stratum.empty()) continue;
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(stratum.size())));
    take = std::clamp<std::size_t>(take, 1, stratum.size());
    rng.shuffle(std::span<std::size_t>(stratum));
    selected.insert(selected.end(), stratum.begin(), stratum.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(selected.begin(), selected.end());
  std::vector<Message> out;
  for (auto i : selected) out.push_back(msgs[i]);
  return MessageSet(std::move(out));
}

bool looks_english(std::string_view s) {
  std::size_t total = 0, ok = 0;
  for (const auto& ch : text::utf8_chars(s)) {
    ++total;
    if (ch.size() == 1) {
      const auto c = static_cast<unsigned char>(ch[0]);
      if (c < 0x80 && (std::isalnum(c) || std::ispunct(c) || std::isspace(c))) ++ok;
    }
  }
  return total > 0 && static_cast<double>(ok) >= kEnglishCharFraction * static_cast<double>(total);
}

MessageSet filter_for_explanation(const MessageSet& set,
                                  const std::map<std::string, Label>& predictions,
                                  std::size_t token_cap) {
  for (const auto& m : set.messages()) {
    if (!predictions.contains(m.id)) {
      throw Error(ErrorCode::MissingPrediction, "no prediction for message '" + m.id + "'");
    }
  }
  std::vector<Message> out;
  for (const auto& m : set.messages()) {
    if (m.label != Label::Scam || predictions.at(m.id) != Label::Scam) continue;
    if (!looks_english(m.subject.value_or("") + " " + m.body)) continue;
    Message kept = m;
    auto words = text::split_whitespace(m.body);
    if (words.size() > token_cap) kept.body = text::join(truncate_front(words, token_cap), " ");
    out.push_back(std::move(kept));
  }
  return MessageSet(std::move(out));
}

std::vector<RawRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<RawRecord> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      rows.push_back(RawRecord::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::IoError,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::ordered_json>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
}

nlohmann::ordered_json to_json(const Message& m) {
  nlohmann::ordered_json j;
  j["id"] = m.id;
  j["channel"] = channel_name(m.channel);
  if (m.subject) j["subject"] = *m.subject;
  j["body"] = m.body;
  j["label"] = label_name(m.label);
  j["source"] = m.source;
  return j;
}

MessageSet load_messages(const std::filesystem::path& path) {
  const auto rows = read_jsonl(path);
  std::vector<Message> out;
  out.reserve(rows.size());
  const std::string source = path.stem().string();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto channel = string_field(rows[i], "channel");
    if (!channel) {
      throw Error(ErrorCode::MissingField,
                  path.string() + ": record " + std::to_string(i) + " has no channel");
    }
    out.push_back(message_from_record(rows[i], parse_channel(*channel), i, source));
  }
  return MessageSet(std::move(out));
}

void save_messages(const std::filesystem::path& path, const MessageSet& set) {
  std::vector<nlohmann::ordered_json> rows;
  rows.reserve(set.size());
  for (const auto& m : set.messages()) rows.push_back(to_json(m));
  write_jsonl(path, rows);
}

}  // namespace vexa
