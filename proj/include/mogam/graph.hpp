#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mogam/matrix.hpp"

namespace mogam {

// Ordered object-class vocabulary; class ids index rows/columns of every
// co-occurrence matrix.
class ObjectVocabulary {
public:
    static ObjectVocabulary from_names(std::vector<std::string> names);
    // The 80 COCO classes the default detector vocabulary is built from.
    static ObjectVocabulary coco80();

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name_of(int id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }
    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    int id_of(const std::string& name) const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

struct Detection {
    int class_id = 0;
    std::string instance_tag;  // distinguishes same-class instances in one frame
};

struct FrameDetections {
    int frame_index = 0;
    std::vector<Detection> instances;
};

// Per-vlog detection record at 1 FPS. frame_count covers all sampled frames,
// including detection-empty frames that are not stored.
struct DetectionLog {
    std::string vlog_id;
    int frame_count = 0;
    std::vector<FrameDetections> frames;
};

struct VlogGraph {
    std::string vlog_id;
    Matrix adjacency;      // normalized co-occurrence, T x T, symmetric
    Matrix node_features;  // one-hot per class: exactly the T x T identity
};

struct GraphBuildOptions {
    // Count unordered same-class instance pairs C(k,2) on the diagonal.
    bool diagonal_pairs = true;
};

void validate_detection_log(const DetectionLog& log, const ObjectVocabulary& vocab);

// Raw co-occurrence counts: cross-class instance-count products plus the
// optional same-class pair diagonal. Entries are integral, kept in doubles.
Matrix build_cooccurrence(const DetectionLog& log, const ObjectVocabulary& vocab,
                          const GraphBuildOptions& options = {});

// Divide every entry by the total frame count of the vlog.
Matrix normalize_adjacency(const Matrix& counts, int frame_count);

// One-hot node features: the T x T identity.
Matrix node_features(const ObjectVocabulary& vocab);

VlogGraph build_vlog_graph(const DetectionLog& log, const ObjectVocabulary& vocab,
                           const GraphBuildOptions& options = {});

}  // namespace mogam
