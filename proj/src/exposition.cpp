// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "ledgerwatch/ingest.hpp"
#include "ledgerwatch/serialization.hpp"

namespace ledgerwatch {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

class LineParser {
 public:
  explicit LineParser(std::string_view line) : s_(line) {}

  MetricSample parse() {
    MetricSample sample;
    const auto name = take_name();
    auto series = parse_enum<MetricSeries>(name);
    if (!series) fail("unknown series '" + std::string(name) + "'");
    sample.series = *series;
    skip_space();
    if (peek() == '{') sample.labels = take_labels();
    skip_space();
    sample.value = take_number<double>("value");
    skip_space();
    if (at_end()) fail("missing timestamp");
    sample.timestamp = take_number<TimestampMs>("timestamp");
    skip_space();
    if (!at_end()) fail("trailing characters");
    if (auto problem = check_sample(sample); !problem.empty()) fail(problem);
    return sample;
  }

 private:
  [[noreturn]] static void fail(const std::string& message) { throw std::invalid_argument(message); }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  void skip_space() {
    while (!at_end() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view take_name() {
    const auto start = pos_;
    while (!at_end() && is_name_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name");
    return s_.substr(start, pos_ - start);
  }

  Labels take_labels() {
    Labels labels;
    expect('{');
    skip_space();
    while (peek() != '}') {
      const std::string key(take_name());
      skip_space();
      expect('=');
      skip_space();
      expect('"');
      std::string value;
      while (peek() != '"') {
        if (at_end()) fail("unterminated label value");
        char c = s_[pos_++];
        if (c == '\\') {
          if (at_end()) fail("unterminated escape");
          c = s_[pos_++];
          if (c == 'n') c = '\n';
        }
        value += c;
      }
      ++pos_;
      labels[key] = std::move(value);
      skip_space();
      if (peek() == ',') {
        ++pos_;
        skip_space();
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    ++pos_;
    return labels;
  }

  template <typename T>
  T take_number(const char* what) {
    const auto start = pos_;
    while (!at_end() && s_[pos_] != ' ' && s_[pos_] != '\t') ++pos_;
    const auto token = s_.substr(start, pos_ - start);
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
      fail(std::string("invalid ") + what + " '" + std::string(token) + "'");
    }
    return value;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ExpositionResult parse_exposition(std::string_view text) {
  ExpositionResult result;
  std::uint64_t number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    try {
      result.samples.push_back(LineParser(line.substr(first)).parse());
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({number, std::string(line), e.what()});
    }
  }
  return result;
}

std::string to_exposition(std::span<const MetricSample> samples) {
  std::string out;
  for (const auto& s : samples) {
    std::string name(to_string(s.series));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out += name;
    if (!s.labels.empty()) {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : s.labels) {
        if (!first) out += ',';
        first = false;
        out += k + "=\"";
        for (char c : v) {
          if (c == '"' || c == '\\') out += '\\';
          if (c == '\n') {
            out += "\\n";
            continue;
          }
          out += c;
        }
        out += '"';
      }
      out += '}';
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, " %.17g %lld\n", s.value, static_cast<long long>(s.timestamp));
    out += buf;
  }
  return out;
}

}  // namespace ledgerwatch
