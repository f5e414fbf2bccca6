#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace affdim {

using Index = std::uint32_t;

/// Either a finite index set, or a finite base plus every system index >= tail_start.
/// Canonical form: base sorted, unique, and strictly below tail_start.
class SubsetSpec {
 public:
  SubsetSpec() = default;

  static SubsetSpec finite(std::vector<Index> indices) {
    SubsetSpec r;
    r.base_ = std::move(indices);
    r.canonicalize();
    if (r.base_.empty()) throw Error(ErrorCode::EmptySubset, "subset has no indices");
    return r;
  }

  static SubsetSpec cofinite(std::vector<Index> base, Index tail_start) {
    SubsetSpec r;
    r.base_ = std::move(base);
    r.tail_ = tail_start;
    r.canonicalize();
    return r;
  }

  const std::vector<Index>& base() const noexcept { return base_; }
  std::optional<Index> tail_start() const noexcept { return tail_; }
  bool is_finite() const noexcept { return !tail_.has_value(); }
  std::size_t size() const noexcept { return base_.size(); }

  bool contains(Index i) const {
    if (tail_ && i >= *tail_) return true;
    return std::binary_search(base_.begin(), base_.end(), i);
  }

  /// Indices <= n; the tail contributes tail_start..n, and the caller filters by system membership.
  SubsetSpec truncated(Index n, const std::vector<Index>& tail_members) const {
    std::vector<Index> out;
    for (Index i : base_)
      if (i <= n) out.push_back(i);
    if (tail_)
      for (Index i : tail_members)
        if (i >= *tail_ && i <= n) out.push_back(i);
    return finite(std::move(out));
  }

  SubsetSpec unite(const SubsetSpec& o) const {
    std::vector<Index> b = base_;
    b.insert(b.end(), o.base_.begin(), o.base_.end());
    std::optional<Index> t = tail_;
    if (o.tail_) t = t ? std::min(*t, *o.tail_) : o.tail_;
    SubsetSpec r;
    r.base_ = std::move(b);
    r.tail_ = t;
    r.canonicalize();
    return r;
  }

  std::string to_string() const {
    std::string out;
    std::size_t i = 0;
    while (i < base_.size()) {
      std::size_t j = i;
      while (j + 1 < base_.size() && base_[j + 1] == base_[j] + 1) ++j;
      if (!out.empty()) out += ',';
      if (j >= i + 2) {
        out += std::to_string(base_[i]) + ".." + std::to_string(base_[j]);
        i = j + 1;
      } else {
        out += std::to_string(base_[i]);
        ++i;
      }
    }
    if (tail_) {
      if (!out.empty()) out += '+';
      out += "tail(" + std::to_string(*tail_) + ")";
    }
    return out;
  }

  friend bool operator==(const SubsetSpec& a, const SubsetSpec& b) {
    return a.base_ == b.base_ && a.tail_ == b.tail_;
  }
  friend bool operator<(const SubsetSpec& a, const SubsetSpec& b) {
    if (a.base_ != b.base_) return a.base_ < b.base_;
    return a.tail_ < b.tail_;
  }

 private:
  void canonicalize() {
    std::sort(base_.begin(), base_.end());
    base_.erase(std::unique(base_.begin(), base_.end()), base_.end());
    if (tail_) std::erase_if(base_, [t = *tail_](Index i) { return i >= t; });
  }

  std::vector<Index> base_;
  std::optional<Index> tail_;
};

namespace detail {

class SubsetParser {
 public:
  explicit SubsetParser(std::string_view text) : t_(text) {}

  SubsetSpec parse() {
    std::vector<Index> base;
    std::optional<Index> tail;
    skip();
    if (pos_ >= t_.size()) throw SyntaxError(pos_, "empty subset expression");
    while (true) {
      skip();
      if (t_.substr(pos_, 4) == "tail") {
        pos_ += 4;
        expect('(');
        const Index n = number();
        expect(')');
        tail = tail ? std::min(*tail, n) : n;
      } else {
        const Index a = number();
        skip();
        if (t_.substr(pos_, 2) == "..") {
          const std::size_t at = pos_;
          pos_ += 2;
          const Index b = number();
          if (b < a) throw SyntaxError(at, "descending range");
          if (b - a > 1'000'000) throw SyntaxError(at, "range too long");
          for (Index i = a; i <= b; ++i) base.push_back(i);
        } else {
          base.push_back(a);
        }
      }
      skip();
      if (pos_ >= t_.size()) break;
      if (t_[pos_] == ',' || t_[pos_] == '+') {
        ++pos_;
        continue;
      }
      throw SyntaxError(pos_, std::string("unexpected character '") + t_[pos_] + "'");
    }
    if (tail) return SubsetSpec::cofinite(std::move(base), *tail);
    return SubsetSpec::finite(std::move(base));
  }

 private:
  void skip() {
    while (pos_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= t_.size() || t_[pos_] != c) throw SyntaxError(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }
  Index number() {
    skip();
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (pos_ < t_.size() && std::isdigit(static_cast<unsigned char>(t_[pos_]))) {
      v = v * 10 + static_cast<std::uint64_t>(t_[pos_] - '0');
      if (v > 0xFFFFFFFFull) throw SyntaxError(start, "index too large");
      ++pos_;
    }
    if (pos_ == start) throw SyntaxError(start, "expected a natural number");
    if (v == 0) throw SyntaxError(start, "indices start at 1");
    return static_cast<Index>(v);
  }

  std::string_view t_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Grammar: terms separated by ',' or '+'; a term is n, a..b, or tail(n).
inline SubsetSpec parse_subset(std::string_view expr) { return detail::SubsetParser(expr).parse(); }

}  // namespace affdim
