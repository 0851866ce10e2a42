#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gesturescope {

// BODY_25 layout of the upstream keypoint detector.
inline constexpr std::size_t kBodyKeypoints = 25;

namespace body25 {
inline constexpr std::size_t Nose = 0;
inline constexpr std::size_t Neck = 1;
inline constexpr std::size_t RShoulder = 2;
inline constexpr std::size_t RElbow = 3;
inline constexpr std::size_t RWrist = 4;
inline constexpr std::size_t LShoulder = 5;
inline constexpr std::size_t LElbow = 6;
inline constexpr std::size_t LWrist = 7;
inline constexpr std::size_t MidHip = 8;
inline constexpr std::size_t RAnkle = 11;
inline constexpr std::size_t LAnkle = 14;
}  // namespace body25

/// Pixel-space keypoint. confidence == 0 means undetected and x/y are meaningless.
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;

    bool detected() const { return confidence > 0.0; }
    bool operator==(const Keypoint&) const = default;
};

struct PoseFrame {
    std::size_t frame_index = 0;
    double timestamp = 0.0;
    std::array<Keypoint, kBodyKeypoints> keypoints{};

    bool operator==(const PoseFrame&) const = default;
};

/// Frames plus whatever the source said about the video raster.
struct PoseDocument {
    std::vector<PoseFrame> frames;
    std::optional<double> frame_width;
    std::optional<double> frame_height;
};

struct TranscriptWord {
    std::string text;
    double start = 0.0;
    double end = 0.0;
    std::optional<std::string> pos_tag;
    // Set when the word closes a sentence (terminal punctuation attached or
    // immediately following). Used only for phrase chunking.
    bool sentence_end = false;

    bool operator==(const TranscriptWord&) const = default;
};

struct EmbeddingTable {
    std::size_t dimension = 0;
    std::unordered_map<std::string, std::vector<double>> entries;

    const std::vector<double>* find(const std::string& word) const;
};

/// Half-open frame index range [begin, end).
struct FrameRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool empty() const { return begin >= end; }
    std::size_t size() const { return empty() ? 0 : end - begin; }
    bool operator==(const FrameRange&) const = default;
};

// Pose input. Accepts the consolidated {"frames":[...]} document, a bare
// array of frames, or a single per-frame file from the keypoint detector
// ({"people":[{"pose_keypoints_2d":[...75 floats]}]}).
PoseDocument parse_pose_document(std::string_view source, std::optional<double> fps_hint = std::nullopt);
std::vector<PoseFrame> parse_pose_frames(std::string_view source, std::optional<double> fps_hint = std::nullopt);

// Directory of per-frame detector files, ordered by the frame number embedded
// in each file name (falling back to lexical order).
PoseDocument parse_pose_directory(const std::filesystem::path& dir, std::optional<double> fps_hint);

/// Reads a file or a directory of per-frame files.
PoseDocument load_pose(const std::filesystem::path& path, std::optional<double> fps_hint);

std::string serialize_pose_frames(const std::vector<PoseFrame>& frames);

std::vector<TranscriptWord> parse_transcript(std::string_view source);
std::string serialize_transcript(const std::vector<TranscriptWord>& words);

EmbeddingTable load_embeddings(std::string_view source);

/// One range per word: the frames whose timestamp lies in [start, end).
std::vector<FrameRange> align(const std::vector<PoseFrame>& frames, const std::vector<TranscriptWord>& words);
FrameRange frames_in_interval(const std::vector<PoseFrame>& frames, double start, double end);

std::string read_file(const std::filesystem::path& path);

}  // namespace gesturescope
