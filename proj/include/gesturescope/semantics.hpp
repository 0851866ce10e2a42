#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gesturescope/ingest.hpp"

namespace gesturescope {

enum class PhraseKind { NP, VP, PP, SVO };

std::string_view to_string(PhraseKind k);
PhraseKind phrase_kind_from_string(std::string_view s);

struct PhraseSpan {
    std::size_t id = 0;
    PhraseKind kind = PhraseKind::NP;
    std::size_t word_begin = 0;  // inclusive
    std::size_t word_end = 0;    // exclusive
    std::string text;
    double start = 0.0;
    double end = 0.0;
    std::size_t occurrence_count = 1;
    std::vector<double> embedding;
    bool unembedded = false;  // no in-vocabulary token; kept out of projection

    std::size_t word_count() const { return word_end - word_begin; }
};

/// Phrase annotation supplied instead of POS tags: kind plus inclusive word indices.
struct PhraseAnnotation {
    PhraseKind kind = PhraseKind::NP;
    std::size_t first_word = 0;
    std::size_t last_word = 0;
};

std::vector<PhraseAnnotation> parse_phrase_annotations(std::string_view source);

/// Maps Universal POS tags (and the common Penn Treebank tags) onto the
/// Universal set. Unknown tags map to "X".
std::string universal_tag(std::string_view tag);

/// Closed-class fallback tagger: determiners, prepositions, pronouns,
/// conjunctions, auxiliaries; everything else is tagged NOUN.
void tag_closed_class(std::vector<TranscriptWord>& words);

/// Tag-pattern chunking into NP/PP/VP/SVO. Throws ConfigError when a word has
/// no POS tag.
std::vector<PhraseSpan> extract_phrases(const std::vector<TranscriptWord>& words);

/// Builds spans from annotations, bypassing the chunker.
std::vector<PhraseSpan> phrases_from_annotations(const std::vector<TranscriptWord>& words,
                                                 const std::vector<PhraseAnnotation>& annotations);

/// Lowercases and strips surrounding punctuation.
std::string normalize_token(std::string_view token);

struct PhraseEmbedding {
    std::vector<double> vector;
    bool excluded = false;
};

PhraseEmbedding phrase_embedding(const PhraseSpan& span, const EmbeddingTable& table);
void embed_phrases(std::vector<PhraseSpan>& spans, const EmbeddingTable& table);

struct PhraseFilter {
    std::optional<std::pair<double, double>> time_range;
    std::optional<std::size_t> min_occurrence;
    std::optional<std::set<PhraseKind>> kinds;
};

std::vector<PhraseSpan> filter_phrases(const std::vector<PhraseSpan>& spans, const PhraseFilter& filter);

}  // namespace gesturescope
