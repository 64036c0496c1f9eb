// Copyright 2026 The SciSumm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat key=value run configuration. File values are overridden by flags;
// the resolved set is hashed and stamped into every artifact.

#pragma once

#include <cstdint>
#include <fstream>
#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scisumm/checkpoint.hpp"
#include "scisumm/encoder.hpp"
#include "scisumm/errors.hpp"
#include "scisumm/extractor.hpp"
#include "scisumm/model.hpp"

namespace scisumm {

enum class KeyKind { kUint, kDouble, kBool, kString, kChoice };

struct KeySpec {
  const char* name;
  const char* default_value;
  KeyKind kind;
  bool model_key;  // part of the checkpoint compatibility hash
  std::vector<std::string> choices = {};
};

inline const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"d_model", "64", KeyKind::kUint, true},
      {"d_ff", "128", KeyKind::kUint, true},
      {"layers", "2", KeyKind::kUint, true},
      {"heads", "4", KeyKind::kUint, true},
      {"window", "50", KeyKind::kUint, true},
      {"global_ratio", "20", KeyKind::kDouble, true},
      {"global_policy", "stride", KeyKind::kChoice, true, {"stride", "random"}},
      {"max_sentences", "500", KeyKind::kUint, true},
      {"s_max", "32", KeyKind::kUint, true},
      {"length_buckets", "100", KeyKind::kUint, true},
      {"max_chunk_tokens", "3072", KeyKind::kUint, true},
      {"encoder", "stub", KeyKind::kChoice, true, {"stub", "external"}},
      {"encoder_seed", "7", KeyKind::kUint, true},
      {"stub_pinned", "", KeyKind::kString, true},  // comma-separated tokens
      {"embeddings_path", "", KeyKind::kString, false},
      {"combine", "sum", KeyKind::kChoice, true, {"sum", "concat"}},
      {"segment_parity", "global", KeyKind::kChoice, true, {"global", "section"}},
      {"budget_ratio", "0.2", KeyKind::kDouble, false},
      {"trigram_threshold", "none", KeyKind::kString, false},
      {"lr_scale", "2.0", KeyKind::kDouble, false},
      {"warmup_steps", "50", KeyKind::kUint, false},
      {"accumulation_steps", "10", KeyKind::kUint, false},
      {"clip_norm", "5.0", KeyKind::kDouble, false},
      {"epochs", "10", KeyKind::kUint, false},
      {"reinforced", "false", KeyKind::kBool, false},
      {"candidates_k", "5", KeyKind::kUint, false},
      {"holdout_ratio", "0.1", KeyKind::kDouble, false},
      {"seed", "1", KeyKind::kUint, false},
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class RunConfig {
 public:
  RunConfig() {
    for (const KeySpec& k : config_keys()) values_[k.name] = k.default_value;
  }

  void set(const std::string& key, const std::string& raw) {
    const KeySpec& spec = find(key);
    const std::string value = trim(raw);
    check_value(spec, value);
    values_[key] = value;
  }

  // Applies `key = value` lines; '#' starts a comment.
  void merge_text(const std::string& text, const std::string& origin = "config") {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(origin + ":" + std::to_string(n) + ": expected key=value");
      }
      try {
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
      } catch (const std::exception& e) {
        throw ParseError(origin + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  }

  void merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    merge_text(ss.str(), path);
  }

  const std::string& get(const std::string& key) const {
    find(key);
    return values_.at(key);
  }
  std::size_t get_uint(const std::string& key) const { return std::stoull(get(key)); }
  double get_double(const std::string& key) const { return std::stod(get(key)); }
  bool get_bool(const std::string& key) const { return parse_bool(get(key)).value(); }

  // Sorted key=value lines.
  std::string canonical_text(bool model_only = false) const {
    std::string out;
    for (const auto& [k, v] : values_) {
      if (model_only && !find(k).model_key) continue;
      out += k + "=" + v + "\n";
    }
    return out;
  }

  std::uint64_t hash() const { return detail::fnv1a64(canonical_text()); }
  std::uint64_t model_hash() const { return detail::fnv1a64(canonical_text(true)); }

  ModelConfig model_config() const {
    ModelConfig m;
    m.d_model = get_uint("d_model");
    m.d_ff = get_uint("d_ff");
    m.layers = get_uint("layers");
    m.heads = get_uint("heads");
    m.window = get_uint("window");
    m.global_ratio = get_double("global_ratio");
    m.global_policy = get("global_policy") == "random" ? GlobalPolicy::kRandom : GlobalPolicy::kStride;
    m.max_sentences = get_uint("max_sentences");
    m.s_max = get_uint("s_max");
    m.length_buckets = get_uint("length_buckets");
    m.max_chunk_tokens = get_uint("max_chunk_tokens");
    m.encoder_seed = get_uint("encoder_seed");
    m.combine = get("combine") == "concat" ? Combine::kConcat : Combine::kSum;
    m.segment_parity = get("segment_parity") == "section" ? SegmentParity::kPerSection
                                                          : SegmentParity::kGlobal;
    return m;
  }

  SelectionConfig selection_config() const {
    SelectionConfig s;
    s.budget_ratio = get_double("budget_ratio");
    const std::string& t = get("trigram_threshold");
    if (t != "none") s.trigram_threshold = std::stoi(t);
    return s;
  }

  std::unique_ptr<SentenceEncoder> make_encoder() const {
    if (get("encoder") == "stub") {
      std::vector<std::string> pinned;
      std::istringstream in(get("stub_pinned"));
      for (std::string t; std::getline(in, t, ',');)
        if (!trim(t).empty()) pinned.push_back(tokenize(trim(t)).at(0));
      return std::make_unique<StubEncoder>(get_uint("encoder_seed"), get_uint("d_model"), std::move(pinned));
    }
    const std::string& path = get("embeddings_path");
    if (path.empty()) throw ArgumentError("encoder=external requires embeddings_path");
    auto enc = std::make_unique<PrecomputedEncoder>(PrecomputedEncoder::load(path));
    if (enc->dim() != get_uint("d_model")) {
      throw DimensionError("embeddings have width " + std::to_string(enc->dim()) +
                           " but d_model is " + get("d_model"));
    }
    return enc;
  }

 private:
  static std::optional<bool> parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    return std::nullopt;
  }

  static const KeySpec& find(const std::string& key) {
    for (const KeySpec& k : config_keys())
      if (key == k.name) return k;
    throw ArgumentError("unknown config key: " + key);
  }

  static void check_value(const KeySpec& spec, const std::string& v) {
    const std::string bad = std::string("invalid value for ") + spec.name + ": \"" + v + "\"";
    std::size_t used = 0;
    try {
      switch (spec.kind) {
        case KeyKind::kUint:
          if (v.empty() || v[0] == '-') throw ArgumentError(bad);
          std::stoull(v, &used);
          break;
        case KeyKind::kDouble:
          std::stod(v, &used);
          break;
        case KeyKind::kBool:
          if (!parse_bool(v)) throw ArgumentError(bad);
          used = v.size();
          break;
        case KeyKind::kChoice:
          if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end())
            throw ArgumentError(bad);
          used = v.size();
          break;
        case KeyKind::kString:
          used = v.size();
          break;
      }
    } catch (const std::logic_error&) {
      throw ArgumentError(bad);
    }
    if (used != v.size()) throw ArgumentError(bad);
    if (std::string(spec.name) == "trigram_threshold" && v != "none") {
      try {
        if (std::stoi(v, &used) < 0 || used != v.size()) throw ArgumentError(bad);
      } catch (const std::logic_error&) {
        throw ArgumentError(bad);
      }
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace scisumm
