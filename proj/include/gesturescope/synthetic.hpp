#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gesturescope/ingest.hpp"

namespace gesturescope::synthetic {

// Scripted speaker for fixtures and benchmarks: a 1280x720 raster, one
// presenter who cycles through rest / open / raised / beat gestures sentence
// by sentence, with a POS-tagged transcript and a small embedding table.
struct SpeakerOptions {
    double seconds = 30.0;
    double fps = 25.0;
    std::uint64_t seed = 7;
    double jitter_px = 1.0;
    bool dropouts = true;       // brief wrist detection losses
    bool audience = false;      // add a second, off-center person to some frames
    double word_seconds = 0.38;
    double sentence_pause = 0.45;
};

struct SpeakerFixture {
    PoseDocument pose;
    std::vector<TranscriptWord> words;  // includes "." tokens like a raw ASR dump
    std::string embeddings_text;
    std::string pose_json;
    std::string transcript_json;
};

SpeakerFixture make_speaker(const SpeakerOptions& options = {});

}  // namespace gesturescope::synthetic
