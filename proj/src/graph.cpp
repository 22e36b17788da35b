#include "mogam/graph.hpp"

#include <set>
#include <stdexcept>

namespace mogam {

ObjectVocabulary ObjectVocabulary::from_names(std::vector<std::string> names) {
    if (names.empty()) throw std::invalid_argument("vocabulary must contain at least one class");
    ObjectVocabulary v;
    v.names_ = std::move(names);
    for (int i = 0; i < static_cast<int>(v.names_.size()); ++i) {
        if (v.names_[i].empty()) throw std::invalid_argument("vocabulary: empty class name");
        auto [_, inserted] = v.index_.emplace(v.names_[i], i);
        if (!inserted) {
            throw std::invalid_argument("vocabulary: duplicate class name '" + v.names_[i] + "'");
        }
    }
    return v;
}

ObjectVocabulary ObjectVocabulary::coco80() {
    return from_names({
        "person",        "bicycle",      "car",           "motorcycle",    "airplane",
        "bus",           "train",        "truck",         "boat",          "traffic light",
        "fire hydrant",  "stop sign",    "parking meter", "bench",         "bird",
        "cat",           "dog",          "horse",         "sheep",         "cow",
        "elephant",      "bear",         "zebra",         "giraffe",       "backpack",
        "umbrella",      "handbag",      "tie",           "suitcase",      "frisbee",
        "skis",          "snowboard",    "sports ball",   "kite",          "baseball bat",
        "baseball glove", "skateboard",  "surfboard",     "tennis racket", "bottle",
        "wine glass",    "cup",          "fork",          "knife",         "spoon",
        "bowl",          "banana",       "apple",         "sandwich",      "orange",
        "broccoli",      "carrot",       "hot dog",       "pizza",         "donut",
        "cake",          "chair",        "couch",         "potted plant",  "bed",
        "dining table",  "toilet",       "tv",            "laptop",        "mouse",
        "remote",        "keyboard",     "cell phone",    "microwave",     "oven",
        "toaster",       "sink",         "refrigerator",  "book",          "clock",
        "vase",          "scissors",     "teddy bear",    "hair drier",    "toothbrush",
    });
}

int ObjectVocabulary::id_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw std::invalid_argument("unknown object class '" + name + "'");
    }
    return it->second;
}

void validate_detection_log(const DetectionLog& log, const ObjectVocabulary& vocab) {
    const int t = vocab.size();
    if (log.frame_count < 1) {
        throw std::invalid_argument("detection log '" + log.vlog_id +
                                    "': frame_count must be >= 1");
    }
    if (static_cast<int>(log.frames.size()) > log.frame_count) {
        throw std::invalid_argument("detection log '" + log.vlog_id +
                                    "': more stored frames than frame_count");
    }
    int prev_index = -1;
    for (const FrameDetections& frame : log.frames) {
        if (frame.frame_index <= prev_index) {
            throw std::invalid_argument("detection log '" + log.vlog_id +
                                        "': frame indices must be strictly increasing");
        }
        if (frame.frame_index >= log.frame_count) {
            throw std::invalid_argument("detection log '" + log.vlog_id + "': frame index " +
                                        std::to_string(frame.frame_index) +
                                        " outside frame_count");
        }
        prev_index = frame.frame_index;
        std::set<std::string> tags;
        for (const Detection& det : frame.instances) {
            if (det.class_id < 0 || det.class_id >= t) {
                throw std::invalid_argument(
                    "detection log '" + log.vlog_id + "', frame " +
                    std::to_string(frame.frame_index) + ": class id " +
                    std::to_string(det.class_id) + " outside vocabulary of size " +
                    std::to_string(t));
            }
            if (!tags.insert(det.instance_tag).second) {
                throw std::invalid_argument("detection log '" + log.vlog_id + "', frame " +
                                            std::to_string(frame.frame_index) +
                                            ": duplicate instance tag '" + det.instance_tag +
                                            "'");
            }
        }
    }
}

Matrix build_cooccurrence(const DetectionLog& log, const ObjectVocabulary& vocab,
                          const GraphBuildOptions& options) {
    validate_detection_log(log, vocab);
    const int t = vocab.size();
    Matrix counts(t, t, 0.0);
    std::vector<int> per_class(t, 0);
    for (const FrameDetections& frame : log.frames) {
        for (int& c : per_class) c = 0;
        for (const Detection& det : frame.instances) ++per_class[det.class_id];
        for (int i = 0; i < t; ++i) {
            const int ki = per_class[i];
            if (ki == 0) continue;
            if (options.diagonal_pairs && ki >= 2) {
                counts(i, i) += static_cast<double>(ki) * (ki - 1) / 2.0;
            }
            for (int j = i + 1; j < t; ++j) {
                const int kj = per_class[j];
                if (kj == 0) continue;
                const double pairs = static_cast<double>(ki) * kj;
                counts(i, j) += pairs;
                counts(j, i) += pairs;
            }
        }
    }
    return counts;
}

Matrix normalize_adjacency(const Matrix& counts, int frame_count) {
    if (frame_count < 1) {
        throw std::invalid_argument("normalize_adjacency: empty vlog (frame_count = " +
                                    std::to_string(frame_count) + ")");
    }
    // True division, not reciprocal multiplication: integer counts divided by
    // an integer frame count round identically when both scale by k, which
    // is what makes frame duplication a bitwise no-op.
    Matrix out = counts;
    const double n = static_cast<double>(frame_count);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] /= n;
    return out;
}

Matrix node_features(const ObjectVocabulary& vocab) { return Matrix::identity(vocab.size()); }

VlogGraph build_vlog_graph(const DetectionLog& log, const ObjectVocabulary& vocab,
                           const GraphBuildOptions& options) {
    VlogGraph g;
    g.vlog_id = log.vlog_id;
    g.adjacency = normalize_adjacency(build_cooccurrence(log, vocab, options), log.frame_count);
    g.node_features = node_features(vocab);
    return g;
}

}  // namespace mogam
