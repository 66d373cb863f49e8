// Copyright 2026 The hllrt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// RESP2 framing: the subset of the Redis serialization protocol needed to
// drive PFADD / PFCOUNT / DEL / PING.

#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hllrt/oracle.hpp"

namespace hllrt::resp {

class ProtocolError : public OracleError {
 public:
  explicit ProtocolError(const std::string& what) : OracleError("RESP protocol error: " + what) {}
};

class Timeout : public OracleError {
 public:
  explicit Timeout(const std::string& what) : OracleError("timeout: " + what) {}
};

class ConnectionError : public OracleError {
 public:
  using OracleError::OracleError;
};

class ServerError : public OracleError {
 public:
  using OracleError::OracleError;
};

struct SimpleString {
  std::string text;
  friend bool operator==(const SimpleString&, const SimpleString&) = default;
};

struct Error {
  std::string text;
  friend bool operator==(const Error&, const Error&) = default;
};

struct BulkString {
  std::optional<std::string> bytes;  // nullopt is the null bulk string
  friend bool operator==(const BulkString&, const BulkString&) = default;
};

struct Value;

struct Array {
  std::optional<std::vector<Value>> items;  // nullopt is the null array
  friend bool operator==(const Array&, const Array&);
};

struct Value {
  std::variant<SimpleString, Error, std::int64_t, BulkString, Array> v;

  template <typename T>
  bool is() const noexcept {
    return std::holds_alternative<T>(v);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(v);
  }

  friend bool operator==(const Value&, const Value&) = default;
};

inline bool operator==(const Array& a, const Array& b) { return a.items == b.items; }

inline Value simple(std::string s) { return {SimpleString{std::move(s)}}; }
inline Value error(std::string s) { return {Error{std::move(s)}}; }
inline Value integer(std::int64_t i) { return {i}; }
inline Value bulk(std::string s) { return {BulkString{std::move(s)}}; }
inline Value null_bulk() { return {BulkString{}}; }
inline Value array(std::vector<Value> items) { return {Array{std::move(items)}}; }
inline Value null_array() { return {Array{}}; }

namespace detail {

inline void append_header(std::string& out, char tag, std::int64_t n) {
  out.push_back(tag);
  out += std::to_string(n);
  out += "\r\n";
}

inline void encode_into(std::string& out, const Value& value) {
  struct Visitor {
    std::string& out;
    void operator()(const SimpleString& s) const {
      out.push_back('+');
      out += s.text;
      out += "\r\n";
    }
    void operator()(const Error& e) const {
      out.push_back('-');
      out += e.text;
      out += "\r\n";
    }
    void operator()(std::int64_t i) const { append_header(out, ':', i); }
    void operator()(const BulkString& b) const {
      if (!b.bytes) {
        out += "$-1\r\n";
        return;
      }
      append_header(out, '$', static_cast<std::int64_t>(b.bytes->size()));
      out += *b.bytes;
      out += "\r\n";
    }
    void operator()(const Array& a) const {
      if (!a.items) {
        out += "*-1\r\n";
        return;
      }
      append_header(out, '*', static_cast<std::int64_t>(a.items->size()));
      for (const auto& item : *a.items) encode_into(out, item);
    }
  };
  std::visit(Visitor{out}, value.v);
}

}  // namespace detail

inline std::string encode(const Value& value) {
  std::string out;
  detail::encode_into(out, value);
  return out;
}

// A command is sent as an array of bulk strings.
template <typename Range>
std::string encode_command(const Range& args) {
  std::string out;
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& a : args) ++n;
  detail::append_header(out, '*', static_cast<std::int64_t>(n));
  for (const auto& a : args) {
    const std::string_view s(a);
    detail::append_header(out, '$', static_cast<std::int64_t>(s.size()));
    out.append(s);
    out += "\r\n";
  }
  return out;
}

inline std::string encode_command(std::initializer_list<std::string_view> args) {
  return encode_command<std::initializer_list<std::string_view>>(args);
}

// Byte source the decoder pulls from. Implementations throw Timeout when a
// read stalls and ConnectionError / ProtocolError when the stream ends.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual char get() = 0;
  virtual std::string read_exact(std::size_t n) {
    std::string out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(get());
    return out;
  }
};

class StringSource final : public ByteSource {
 public:
  explicit StringSource(std::string data) : data_(std::move(data)) {}

  char get() override {
    if (pos_ >= data_.size()) throw ProtocolError("truncated reply");
    return data_[pos_++];
  }
  std::string read_exact(std::size_t n) override {
    if (data_.size() - pos_ < n) throw ProtocolError("truncated reply");
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t position() const noexcept { return pos_; }
  bool exhausted() const noexcept { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

namespace detail {

inline constexpr int kMaxNesting = 32;
inline constexpr std::int64_t kMaxBulkLength = 512LL * 1024 * 1024;

inline std::string read_line(ByteSource& src) {
  std::string line;
  for (;;) {
    const char c = src.get();
    if (c == '\r') {
      if (src.get() != '\n') throw ProtocolError("CR not followed by LF");
      return line;
    }
    if (c == '\n') throw ProtocolError("bare LF in line");
    line.push_back(c);
  }
}

inline std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last) {
    throw ProtocolError("invalid integer '" + std::string(s) + "'");
  }
  return v;
}

inline Value decode_at(ByteSource& src, int depth) {
  if (depth > kMaxNesting) throw ProtocolError("nesting too deep");
  const char tag = src.get();
  switch (tag) {
    case '+': return simple(read_line(src));
    case '-': return error(read_line(src));
    case ':': return integer(parse_int(read_line(src)));
    case '$': {
      const auto len = parse_int(read_line(src));
      if (len == -1) return null_bulk();
      if (len < 0 || len > kMaxBulkLength) throw ProtocolError("bad bulk length");
      std::string bytes = src.read_exact(static_cast<std::size_t>(len));
      if (src.get() != '\r' || src.get() != '\n') throw ProtocolError("bulk string not CRLF-terminated");
      return bulk(std::move(bytes));
    }
    case '*': {
      const auto n = parse_int(read_line(src));
      if (n == -1) return null_array();
      if (n < 0 || n > kMaxBulkLength) throw ProtocolError("bad array length");
      std::vector<Value> items;
      items.reserve(static_cast<std::size_t>(std::min<std::int64_t>(n, 1024)));
      for (std::int64_t i = 0; i < n; ++i) items.push_back(decode_at(src, depth + 1));
      return array(std::move(items));
    }
    default:
      throw ProtocolError(std::string("unknown type byte 0x") + "0123456789abcdef"[(tag >> 4) & 0xf] +
                          "0123456789abcdef"[tag & 0xf]);
  }
}

}  // namespace detail

// Consumes exactly one reply. Server error replies come back as Error values.
inline Value decode(ByteSource& src) { return detail::decode_at(src, 0); }

inline Value decode(std::string_view bytes) {
  StringSource src{std::string(bytes)};
  Value v = decode(src);
  if (!src.exhausted()) throw ProtocolError("trailing bytes after reply");
  return v;
}

}  // namespace hllrt::resp
