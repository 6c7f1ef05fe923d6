#pragma once

#include <string>
#include <vector>

#include "mvembed/losses.hpp"
#include "mvembed/tables.hpp"

namespace mvembed {

// Text format: first line "num_nodes dim", then "name v1 ... vdim" per node.
void write_embeddings_text(const FinalEmbeddings& emb, const std::string& path);
FinalEmbeddings read_embeddings_text(const std::string& path);

// Raw little-endian float32 rows plus a JSON shape sidecar at <path>.json.
void write_embeddings_binary(const FinalEmbeddings& emb,
                             const std::string& path);

// CSV "epoch,total,div,c1,c2".
void write_loss_trace(const std::vector<LossBreakdown>& trace,
                      const std::string& path);

// CSV "node,view,weight"; weights is flat num_nodes x num_views.
void write_attention_report(const std::vector<std::string>& node_names,
                            const std::vector<double>& weights,
                            std::size_t num_views, const std::string& path);

// FNV-1a over file bytes, for run manifests.
std::string file_hash_hex(const std::string& path);

}  // namespace mvembed
