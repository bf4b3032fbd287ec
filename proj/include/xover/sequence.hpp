#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "xover/common.hpp"

namespace xover {

// One treatment sequence: the ordered assignment of treatments to
// periods that every subject in a group follows.  Treatments are
// labelled 1..t; text form uses letters with A=1, B=2, and so on.
class TreatmentSequence {
 public:
  TreatmentSequence(std::vector<int> labels, int treatment_count)
      : labels_(std::move(labels)), treatment_count_(treatment_count) {
    if (treatment_count_ < 1) {
      throw ValidationError("treatment count must be at least 1");
    }
    if (labels_.empty()) {
      throw ValidationError("sequence must cover at least one period");
    }
    for (int label : labels_) {
      if (label < 1 || label > treatment_count_) {
        throw ValidationError("treatment label " + std::to_string(label) +
                              " outside 1.." +
                              std::to_string(treatment_count_));
      }
    }
  }

  int period_count() const noexcept {
    return static_cast<int>(labels_.size());
  }
  int treatment_count() const noexcept { return treatment_count_; }

  // Treatment administered in the given period, 0-based.
  int label(int period) const { return labels_.at(period); }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::string str() const {
    std::string out;
    out.reserve(labels_.size());
    for (int label : labels_) {
      if (label <= 26) {
        out.push_back(static_cast<char>('A' + label - 1));
      } else {
        out += "(" + std::to_string(label) + ")";
      }
    }
    return out;
  }

  friend bool operator==(const TreatmentSequence&,
                         const TreatmentSequence&) = default;
  friend auto operator<=>(const TreatmentSequence& a,
                          const TreatmentSequence& b) {
    return a.labels_ <=> b.labels_;
  }

 private:
  std::vector<int> labels_;
  int treatment_count_;
};

// Parses letter form ("ABBA") into a sequence over 1..treatment_count.
inline TreatmentSequence parse_sequence(std::string_view text,
                                        int treatment_count) {
  if (text.empty()) {
    throw ValidationError("empty sequence string");
  }
  std::vector<int> labels;
  labels.reserve(text.size());
  for (char c : text) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c < 'A' || c > 'Z') {
      throw ValidationError(std::string("invalid character '") + c +
                            "' in sequence string");
    }
    labels.push_back(c - 'A' + 1);
  }
  return TreatmentSequence(std::move(labels), treatment_count);
}

// All t^p sequences in lexicographic order.  Throws when the full
// enumeration would exceed `cap` sequences.
inline std::vector<TreatmentSequence> enumerate_sequences(
    int treatment_count, int period_count, std::size_t cap = 1000000) {
  if (treatment_count < 1 || period_count < 1) {
    throw ValidationError("enumeration needs at least one treatment and one period");
  }
  double total = 1.0;
  for (int i = 0; i < period_count; ++i) total *= treatment_count;
  if (total > static_cast<double>(cap)) {
    throw ValidationError("enumeration of " + std::to_string(treatment_count) +
                          "^" + std::to_string(period_count) +
                          " sequences exceeds cap of " + std::to_string(cap));
  }

  std::vector<TreatmentSequence> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> labels(static_cast<std::size_t>(period_count), 1);
  for (;;) {
    out.emplace_back(labels, treatment_count);
    int i = period_count - 1;
    while (i >= 0 && labels[static_cast<std::size_t>(i)] == treatment_count) {
      labels[static_cast<std::size_t>(i)] = 1;
      --i;
    }
    if (i < 0) break;
    ++labels[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace xover
