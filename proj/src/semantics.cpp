#include "gesturescope/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gesturescope/errors.hpp"

namespace gesturescope {

using nlohmann::json;

std::string_view to_string(PhraseKind k) {
    switch (k) {
        case PhraseKind::NP: return "NP";
        case PhraseKind::VP: return "VP";
        case PhraseKind::PP: return "PP";
        case PhraseKind::SVO: return "SVO";
    }
    return "NP";
}

PhraseKind phrase_kind_from_string(std::string_view s) {
    if (s == "NP") return PhraseKind::NP;
    if (s == "VP") return PhraseKind::VP;
    if (s == "PP") return PhraseKind::PP;
    if (s == "SVO" || s == "SVP") return PhraseKind::SVO;
    throw SchemaError("unknown phrase kind \"" + std::string(s) + "\"");
}

std::vector<PhraseAnnotation> parse_phrase_annotations(std::string_view source) {
    json doc;
    try {
        doc = json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed phrase annotations: ") + e.what());
    }
    if (!doc.is_array()) throw SchemaError("phrase annotations must be a JSON array");
    std::vector<PhraseAnnotation> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& a = doc[i];
        if (!a.is_object() || !a.contains("kind") || !a["kind"].is_string() || !a.contains("words") ||
            !a["words"].is_array() || a["words"].empty() || a["words"].size() > 2) {
            throw SchemaError("annotation " + std::to_string(i) + " needs kind and words [first, last]");
        }
        for (const auto& w : a["words"]) {
            if (!w.is_number_unsigned()) throw SchemaError("annotation " + std::to_string(i) + " has a bad word index");
        }
        PhraseAnnotation ann;
        ann.kind = phrase_kind_from_string(a["kind"].get<std::string>());
        ann.first_word = a["words"].front().get<std::size_t>();
        ann.last_word = a["words"].back().get<std::size_t>();
        if (ann.last_word < ann.first_word) {
            throw SchemaError("annotation " + std::to_string(i) + " has last word before first");
        }
        out.push_back(ann);
    }
    return out;
}

std::string universal_tag(std::string_view raw) {
    std::string tag(raw);
    std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::toupper(c); });
    static const std::unordered_set<std::string> universal{
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};
    if (universal.count(tag)) return tag;
    static const std::unordered_map<std::string, std::string> penn{
        {"NN", "NOUN"},  {"NNS", "NOUN"},  {"NNP", "PROPN"}, {"NNPS", "PROPN"}, {"JJ", "ADJ"},
        {"JJR", "ADJ"},  {"JJS", "ADJ"},   {"DT", "DET"},    {"PDT", "DET"},    {"WDT", "DET"},
        {"IN", "ADP"},   {"VB", "VERB"},   {"VBD", "VERB"},  {"VBG", "VERB"},   {"VBN", "VERB"},
        {"VBP", "VERB"}, {"VBZ", "VERB"},  {"MD", "AUX"},    {"RP", "PART"},    {"TO", "PART"},
        {"PRP", "PRON"}, {"PRP$", "PRON"}, {"WP", "PRON"},   {"RB", "ADV"},     {"RBR", "ADV"},
        {"RBS", "ADV"},  {"CC", "CCONJ"},  {"CD", "NUM"},    {"UH", "INTJ"},    {"CONJ", "CCONJ"}};
    if (auto it = penn.find(tag); it != penn.end()) return it->second;
    return "X";
}

std::string normalize_token(std::string_view token) {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
    std::string out(token.substr(b, e - b));
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

void tag_closed_class(std::vector<TranscriptWord>& words) {
    static const std::unordered_map<std::string, std::string> lexicon = [] {
        std::unordered_map<std::string, std::string> m;
        for (const char* w : {"a", "an", "the", "this", "that", "these", "those", "every", "each", "some", "any",
                              "no", "my", "your", "our", "their", "his", "her", "its"})
            m[w] = "DET";
        for (const char* w : {"in", "on", "at", "of", "for", "with", "from", "to", "by", "about", "into", "over",
                              "under", "between", "through", "during", "after", "before", "across", "like"})
            m[w] = "ADP";
        for (const char* w : {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them"})
            m[w] = "PRON";
        for (const char* w : {"and", "or", "but"}) m[w] = "CCONJ";
        for (const char* w : {"is", "are", "was", "were", "be", "been", "am", "will", "would", "can", "could",
                              "should", "do", "does", "did", "have", "has", "had"})
            m[w] = "AUX";
        return m;
    }();
    for (auto& w : words) {
        auto it = lexicon.find(normalize_token(w.text));
        w.pos_tag = it == lexicon.end() ? "NOUN" : it->second;
    }
}

namespace {

struct Chunk {
    PhraseKind kind;
    std::size_t begin;
    std::size_t end;
};

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool is_noun(const std::string& t) { return t == "NOUN" || t == "PROPN"; }

// Longest NP match at i within [i, stop): (DET)? (ADJ)* NOUN+
std::optional<std::size_t> match_np(const std::vector<std::string>& tags, std::size_t i, std::size_t stop) {
    std::size_t j = i;
    if (j < stop && tags[j] == "DET") ++j;
    while (j < stop && tags[j] == "ADJ") ++j;
    const std::size_t nouns = j;
    while (j < stop && is_noun(tags[j])) ++j;
    if (j == nouns) return std::nullopt;
    return j;
}

// (AUX)* VERB (PART)?
std::optional<std::size_t> match_vp(const std::vector<std::string>& tags, std::size_t i, std::size_t stop) {
    std::size_t j = i;
    while (j < stop && tags[j] == "AUX") ++j;
    if (j >= stop || tags[j] != "VERB") return std::nullopt;
    ++j;
    if (j < stop && tags[j] == "PART") ++j;
    return j;
}

void chunk_sentence(const std::vector<std::string>& tags, std::size_t begin, std::size_t stop,
                    std::vector<Chunk>& out) {
    std::vector<Chunk> nps;
    std::vector<Chunk> vps;
    for (std::size_t i = begin; i < stop;) {
        if (auto e = match_np(tags, i, stop)) {
            nps.push_back({PhraseKind::NP, i, *e});
            i = *e;
        } else {
            ++i;
        }
    }
    for (std::size_t i = begin; i < stop;) {
        if (auto e = match_vp(tags, i, stop)) {
            vps.push_back({PhraseKind::VP, i, *e});
            i = *e;
        } else {
            ++i;
        }
    }
    for (std::size_t i = begin; i < stop;) {
        if (tags[i] == "ADP") {
            if (auto e = match_np(tags, i + 1, stop)) {
                out.push_back({PhraseKind::PP, i, *e});
                i = *e;
                continue;
            }
        }
        ++i;
    }
    // SVO: an NP chunk, a VP chunk starting where it ends, and an NP chunk
    // starting where the VP ends.
    std::size_t resume = begin;
    for (const Chunk& subj : nps) {
        if (subj.begin < resume) continue;
        auto vp = std::find_if(vps.begin(), vps.end(), [&](const Chunk& c) { return c.begin == subj.end; });
        if (vp == vps.end()) continue;
        auto obj = std::find_if(nps.begin(), nps.end(), [&](const Chunk& c) { return c.begin == vp->end; });
        if (obj == nps.end()) continue;
        out.push_back({PhraseKind::SVO, subj.begin, obj->end});
        resume = obj->end;
    }
    out.insert(out.end(), nps.begin(), nps.end());
    out.insert(out.end(), vps.begin(), vps.end());
}

std::vector<PhraseSpan> finish_spans(const std::vector<TranscriptWord>& words, std::vector<Chunk> chunks) {
    std::sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.end < b.end;
    });
    std::vector<PhraseSpan> spans;
    spans.reserve(chunks.size());
    for (const Chunk& c : chunks) {
        PhraseSpan s;
        s.id = spans.size();
        s.kind = c.kind;
        s.word_begin = c.begin;
        s.word_end = c.end;
        for (std::size_t w = c.begin; w < c.end; ++w) {
            if (w > c.begin) s.text += ' ';
            s.text += words[w].text;
        }
        s.start = words[c.begin].start;
        s.end = words[c.end - 1].end;
        spans.push_back(std::move(s));
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& s : spans) ++counts[lowercase(s.text)];
    for (auto& s : spans) s.occurrence_count = counts[lowercase(s.text)];
    return spans;
}

}  // namespace

std::vector<PhraseSpan> extract_phrases(const std::vector<TranscriptWord>& words) {
    std::vector<std::string> tags;
    tags.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!words[i].pos_tag) {
            throw ConfigError("word " + std::to_string(i) + " (\"" + words[i].text +
                              "\") has no POS tag and no phrase annotations were supplied");
        }
        tags.push_back(universal_tag(*words[i].pos_tag));
    }
    std::vector<Chunk> chunks;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i].sentence_end || i + 1 == words.size()) {
            chunk_sentence(tags, begin, i + 1, chunks);
            begin = i + 1;
        }
    }
    return finish_spans(words, std::move(chunks));
}

std::vector<PhraseSpan> phrases_from_annotations(const std::vector<TranscriptWord>& words,
                                                 const std::vector<PhraseAnnotation>& annotations) {
    std::vector<Chunk> chunks;
    for (const auto& a : annotations) {
        if (a.last_word >= words.size() || a.last_word < a.first_word) {
            throw SchemaError("phrase annotation references words outside the transcript");
        }
        chunks.push_back({a.kind, a.first_word, a.last_word + 1});
    }
    return finish_spans(words, std::move(chunks));
}

PhraseEmbedding phrase_embedding(const PhraseSpan& span, const EmbeddingTable& table) {
    PhraseEmbedding out;
    out.vector.assign(table.dimension, 0.0);
    std::size_t hits = 0;
    std::size_t pos = 0;
    const std::string& text = span.text;
    while (pos <= text.size()) {
        std::size_t sp = text.find(' ', pos);
        if (sp == std::string::npos) sp = text.size();
        const std::string token = normalize_token(std::string_view(text).substr(pos, sp - pos));
        pos = sp + 1;
        if (token.empty()) continue;
        if (const auto* v = table.find(token)) {
            for (std::size_t d = 0; d < table.dimension; ++d) out.vector[d] += (*v)[d];
            ++hits;
        }
    }
    if (hits == 0) {
        out.vector.clear();
        out.excluded = true;
        return out;
    }
    for (double& x : out.vector) x /= static_cast<double>(hits);
    return out;
}

void embed_phrases(std::vector<PhraseSpan>& spans, const EmbeddingTable& table) {
    for (auto& s : spans) {
        PhraseEmbedding e = phrase_embedding(s, table);
        s.embedding = std::move(e.vector);
        s.unembedded = e.excluded;
    }
}

std::vector<PhraseSpan> filter_phrases(const std::vector<PhraseSpan>& spans, const PhraseFilter& filter) {
    if (filter.time_range && filter.time_range->first > filter.time_range->second) {
        throw ConfigError("time range lower bound exceeds upper bound");
    }
    std::vector<PhraseSpan> out;
    for (const auto& s : spans) {
        if (filter.time_range && (s.start < filter.time_range->first || s.start > filter.time_range->second)) continue;
        if (filter.min_occurrence && s.occurrence_count < *filter.min_occurrence) continue;
        if (filter.kinds && !filter.kinds->count(s.kind)) continue;
        out.push_back(s);
    }
    return out;
}

}  // namespace gesturescope
