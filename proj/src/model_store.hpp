#pragma once

#include <string>
#include <variant>

#include "features.hpp"
#include "iforest.hpp"
#include "labeler.hpp"

namespace isoguard {

inline constexpr int kModelFormatVersion = 1;

// The complete serialized pipeline: feature schema + forest + labeler.
// A loaded bundle is sufficient on its own to score and label any record.
struct ModelBundle {
    int format_version = kModelFormatVersion;
    std::string created_at;         // RFC 3339, UTC
    std::string train_fingerprint;  // content hash of the training configuration
    FeatureSchema schema;
    IsolationForestModel forest;
    std::variant<KMeansLabelerModel, QuantileLabelerModel> labeler;

    bool has_kmeans_labeler() const {
        return std::holds_alternative<KMeansLabelerModel>(labeler);
    }
    Label label_score(double score) const;
    std::vector<Label> label_scores(std::span<const double> scores) const;

    // One-line description of the labeler (threshold or centroids).
    std::string labeler_summary() const;
};

// Writes the bundle as one self-describing JSON document. Reals keep full
// round-trip precision; two saves of the same bundle differ only in the
// created_at line.
void save_bundle(const ModelBundle& bundle, const std::string& path);

// Fully reconstructs a bundle. Unknown format versions and missing or corrupt
// sections raise load errors naming the offending section; there is no
// partial load.
ModelBundle load_bundle(const std::string& path);

std::string now_rfc3339_utc();

// FNV-1a over a canonical description of the training configuration.
std::string fingerprint_hex(const std::string& canonical);

}  // namespace isoguard
