#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexa/error.hpp"

namespace vexa {

enum class Channel { Email, SMS, SNS };
enum class Label { Scam, Ham };

inline constexpr Channel kAllChannels[] = {Channel::Email, Channel::SMS, Channel::SNS};

std::string_view channel_name(Channel c);    // "email" | "sms" | "sns"
std::string_view channel_marker(Channel c);  // "<Email>" | "<SMS>" | "<SNS>"
Channel parse_channel(std::string_view name);
std::optional<Channel> channel_from_marker(std::string_view token);
std::string_view label_name(Label l);        // "scam" | "ham"
Label parse_label(std::string_view name);    // spam/scam/ham, case-insensitive

struct Message {
  std::string id;
  Channel channel = Channel::SMS;
  std::optional<std::string> subject;  // Email only
  std::string body;
  Label label = Label::Ham;
  std::string source;
};

struct FormattedText {
  std::string text;
  std::string channel_marker;
};

struct StratumCount {
  std::size_t scam = 0;
  std::size_t ham = 0;
};

// Immutable, validated list of messages. Construction enforces the Message
// invariants and id uniqueness.
class MessageSet {
 public:
  MessageSet() = default;
  explicit MessageSet(std::vector<Message> messages);

  const std::vector<Message>& messages() const { return messages_; }
  const std::map<Channel, StratumCount>& counts() const { return counts_; }
  std::size_t size() const { return messages_.size(); }
  bool empty() const { return messages_.empty(); }

 private:
  std::vector<Message> messages_;
  std::map<Channel, StratumCount> counts_;
};

using RawRecord = nlohmann::json;

// One Message per record. Records without an `id` get
// "<source>-<channel>-<index>" where index is the record position.
MessageSet ingest(const std::vector<RawRecord>& records, Channel channel,
                  std::string_view default_source = "unknown");

FormattedText format_input(const Message& message);

MessageSet stratified_sample(const MessageSet& set, std::size_t per_channel_per_label,
                             std::uint64_t seed);

// Per channel, keeps round(fraction * n) scam messages (at least one when the
// channel has any). Used for the shared explanation subset.
MessageSet sample_fraction_per_channel(const MessageSet& set, double fraction,
                                       std::uint64_t seed);

template <typename T>
std::vector<T> truncate_front(const std::vector<T>& tokens, std::size_t limit) {
  if (limit == 0) throw Error(ErrorCode::InvalidArgument, "truncate_front: limit must be > 0");
  if (tokens.size() <= limit) return tokens;
  return std::vector<T>(tokens.end() - static_cast<std::ptrdiff_t>(limit), tokens.end());
}

inline constexpr std::size_t kExplanationTokenCap = 1500;
inline constexpr double kEnglishCharFraction = 0.90;

bool looks_english(std::string_view text);

MessageSet filter_for_explanation(const MessageSet& set,
                                  const std::map<std::string, Label>& predictions,
                                  std::size_t token_cap = kExplanationTokenCap);

MessageSet synth_corpus(std::uint64_t seed, std::size_t per_channel_per_label);

// JSON Lines I/O. Message records carry a `channel` field.
std::vector<RawRecord> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::ordered_json>& rows);
nlohmann::ordered_json to_json(const Message& m);
MessageSet load_messages(const std::filesystem::path& path);
void save_messages(const std::filesystem::path& path, const MessageSet& set);

}  // namespace vexa
