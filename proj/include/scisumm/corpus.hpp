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

// Sectioned document model, tokenization and JSONL ingestion.

#pragma once

#include <cctype>
#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scisumm/errors.hpp"
#include "scisumm/log.hpp"

namespace scisumm {

using Tokens = std::vector<std::string>;

// Lowercases ASCII, drops every byte that is neither alphanumeric nor part of
// a multi-byte UTF-8 sequence, and splits on whitespace.
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else if (ch >= 0x80 || std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Code points in a UTF-8 string.
inline std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char ch : text)
    if ((ch & 0xC0) != 0x80) ++n;
  return n;
}

inline std::string join(const Tokens& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

struct Sentence {
  std::string text;
  Tokens tokens;
  std::size_t char_length = 0;
  std::size_t doc_position = 0;
  std::size_t section_index = 0;

  static Sentence make(std::string text, std::size_t doc_position, std::size_t section_index) {
    Sentence s;
    s.tokens = tokenize(text);
    s.char_length = utf8_length(text);
    s.text = std::move(text);
    s.doc_position = doc_position;
    s.section_index = section_index;
    return s;
  }

  bool operator==(const Sentence&) const = default;
};

struct Section {
  std::size_t index = 0;
  std::string title;
  std::vector<Sentence> sentences;

  bool operator==(const Section&) const = default;
};

struct Document {
  std::string id;
  std::vector<Section> sections;
  std::string reference_summary;

  std::size_t n_sentences() const {
    std::size_t n = 0;
    for (const Section& s : sections) n += s.sentences.size();
    return n;
  }

  // Sentences in reading order.
  std::vector<std::reference_wrapper<const Sentence>> sentences() const {
    std::vector<std::reference_wrapper<const Sentence>> out;
    out.reserve(n_sentences());
    for (const Section& sec : sections)
      for (const Sentence& s : sec.sentences) out.emplace_back(s);
    return out;
  }

  const Sentence& sentence(std::size_t i) const {
    for (const Section& sec : sections) {
      if (i < sec.sentences.size()) return sec.sentences[i];
      i -= sec.sentences.size();
    }
    throw ArgumentError("sentence index out of range in document " + id);
  }

  bool operator==(const Document&) const = default;
};

struct LabeledDocument {
  Document document;
  std::vector<int> labels;
};

// Builds a document from section titles and raw sentence strings, assigning
// positions in reading order.
inline Document make_document(std::string id, std::string reference_summary,
                              const std::vector<std::pair<std::string, std::vector<std::string>>>& sections) {
  Document doc;
  doc.id = std::move(id);
  doc.reference_summary = std::move(reference_summary);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    Section sec;
    sec.index = k;
    sec.title = sections[k].first;
    for (const std::string& text : sections[k].second)
      sec.sentences.push_back(Sentence::make(text, pos++, k));
    doc.sections.push_back(std::move(sec));
  }
  return doc;
}

namespace detail {

inline std::string where(std::size_t line_number) {
  return line_number ? "line " + std::to_string(line_number) + ": " : std::string();
}

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* field,
                                           std::size_t line_number) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw SchemaError(where(line_number) + "missing required field \"" + field + "\"");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* field,
                                  std::size_t line_number) {
  const auto& v = require_field(obj, field, line_number);
  if (!v.is_string()) {
    throw SchemaError(where(line_number) + "field \"" + field + "\" must be a string");
  }
  return v.get<std::string>();
}

}  // namespace detail

inline Document document_from_json(const nlohmann::json& obj, std::size_t line_number = 0) {
  using detail::where;
  if (!obj.is_object()) throw SchemaError(where(line_number) + "document must be a JSON object");
  Document doc;
  doc.id = detail::require_string(obj, "id", line_number);
  doc.reference_summary = detail::require_string(obj, "reference_summary", line_number);
  const auto& sections = detail::require_field(obj, "sections", line_number);
  if (!sections.is_array()) {
    throw SchemaError(where(line_number) + "field \"sections\" must be an array");
  }
  if (sections.empty()) {
    throw ValidationError(where(line_number) + "field \"sections\" is empty");
  }
  std::size_t pos = 0;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    if (!s.is_object()) {
      throw SchemaError(where(line_number) + "sections[" + std::to_string(k) +
                        "] must be an object");
    }
    Section sec;
    sec.index = k;
    if (auto t = s.find("title"); t != s.end()) {
      if (!t->is_string()) {
        throw SchemaError(where(line_number) + "field \"sections[" + std::to_string(k) +
                          "].title\" must be a string");
      }
      sec.title = t->get<std::string>();
    }
    auto sents = s.find("sentences");
    if (sents == s.end()) {
      throw SchemaError(where(line_number) + "missing required field \"sections[" +
                        std::to_string(k) + "].sentences\"");
    }
    if (!sents->is_array()) {
      throw SchemaError(where(line_number) + "field \"sections[" + std::to_string(k) +
                        "].sentences\" must be an array");
    }
    for (const auto& text : *sents) {
      if (!text.is_string()) {
        throw SchemaError(where(line_number) + "sections[" + std::to_string(k) +
                          "].sentences entries must be strings");
      }
      sec.sentences.push_back(Sentence::make(text.get<std::string>(), pos++, k));
    }
    doc.sections.push_back(std::move(sec));
  }
  return doc;
}

inline Document parse_document(std::string_view line, std::size_t line_number = 0) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(detail::where(line_number) + "malformed JSON: " + e.what());
  }
  return document_from_json(obj, line_number);
}

inline nlohmann::json to_json(const Document& doc) {
  nlohmann::json sections = nlohmann::json::array();
  for (const Section& sec : doc.sections) {
    nlohmann::json sents = nlohmann::json::array();
    for (const Sentence& s : sec.sentences) sents.push_back(s.text);
    sections.push_back({{"title", sec.title}, {"sentences", std::move(sents)}});
  }
  return {{"id", doc.id}, {"reference_summary", doc.reference_summary}, {"sections", sections}};
}

inline std::string serialize_document(const Document& doc) { return to_json(doc).dump(); }

// Every invariant violation, in document order. Empty means valid.
inline std::vector<std::string> validate(const Document& doc) {
  std::vector<std::string> out;
  if (doc.sections.empty()) out.push_back("document has no sections");
  if (doc.n_sentences() == 0) out.push_back("document has 0 sentences");
  std::size_t expected_pos = 0;
  for (std::size_t k = 0; k < doc.sections.size(); ++k) {
    const Section& sec = doc.sections[k];
    if (sec.index != k) {
      out.push_back("section " + std::to_string(k) + " carries index " +
                    std::to_string(sec.index));
    }
    for (const Sentence& s : sec.sentences) {
      const std::string tag = "sentence " + std::to_string(expected_pos);
      if (s.doc_position != expected_pos) {
        out.push_back(tag + ": doc_position " + std::to_string(s.doc_position) +
                      " breaks the 0..n-1 sequence");
      }
      if (s.section_index != sec.index) {
        out.push_back(tag + ": section_index " + std::to_string(s.section_index) +
                      " does not match enclosing section " + std::to_string(sec.index));
      }
      if (s.tokens.empty()) out.push_back(tag + ": empty sentence (no tokens)");
      if (s.char_length != utf8_length(s.text)) {
        out.push_back(tag + ": char_length " + std::to_string(s.char_length) +
                      " disagrees with text length " + std::to_string(utf8_length(s.text)));
      }
      ++expected_pos;
    }
  }
  return out;
}

// Drops sentences past `max_sentences` (and sections left empty by that).
// Returns true when anything was removed.
inline bool truncate_document(Document& doc, std::size_t max_sentences) {
  const std::size_t n = doc.n_sentences();
  if (n <= max_sentences) return false;
  std::size_t kept = 0;
  std::vector<Section> sections;
  for (Section& sec : doc.sections) {
    if (kept >= max_sentences) break;
    const std::size_t take = std::min(sec.sentences.size(), max_sentences - kept);
    sec.sentences.resize(take);
    kept += take;
    sections.push_back(std::move(sec));
  }
  doc.sections = std::move(sections);
  log_warning("document ", doc.id, ": truncated from ", n, " to ", max_sentences, " sentences");
  return true;
}

struct CorpusLoad {
  std::vector<Document> documents;
  std::vector<std::string> errors;  // "line N: message"
  std::size_t lines = 0;
  std::size_t truncated = 0;
};

// Parses a JSONL stream. Blank lines are skipped; bad lines are reported and
// skipped. Documents failing validate() count as bad lines.
inline CorpusLoad load_corpus(std::istream& in, std::size_t max_sentences = 0) {
  CorpusLoad out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++out.lines;
    try {
      Document doc = parse_document(line, line_number);
      if (auto v = validate(doc); !v.empty()) {
        std::string msg = "line " + std::to_string(line_number) + ": invalid document " + doc.id;
        for (const auto& s : v) msg += "; " + s;
        out.errors.push_back(std::move(msg));
        continue;
      }
      if (max_sentences && truncate_document(doc, max_sentences)) ++out.truncated;
      out.documents.push_back(std::move(doc));
    } catch (const ParseError& e) {
      out.errors.emplace_back(e.what());
    }
  }
  return out;
}

inline CorpusLoad load_corpus_file(const std::string& path, std::size_t max_sentences = 0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return load_corpus(in, max_sentences);
}

struct LabelRecord {
  std::string id;
  std::vector<int> labels;
};

inline std::string serialize_labels(const LabelRecord& rec, const std::string& config_hash = {}) {
  nlohmann::json j = {{"id", rec.id}, {"labels", rec.labels}};
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump();
}

inline LabelRecord parse_labels(std::string_view line, std::size_t line_number = 0) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(detail::where(line_number) + "malformed JSON: " + e.what());
  }
  LabelRecord rec;
  rec.id = detail::require_string(obj, "id", line_number);
  const auto& labels = detail::require_field(obj, "labels", line_number);
  if (!labels.is_array()) throw SchemaError(detail::where(line_number) + "\"labels\" must be an array");
  for (const auto& v : labels) {
    if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
      throw SchemaError(detail::where(line_number) + "\"labels\" entries must be 0 or 1");
    }
    rec.labels.push_back(v.get<int>());
  }
  return rec;
}

inline std::vector<LabelRecord> load_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels file: " + path);
  std::vector<LabelRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_labels(line, n));
  }
  return out;
}

}  // namespace scisumm
