#include "mvembed/io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mvembed/errors.hpp"

namespace mvembed {

void write_embeddings_text(const FinalEmbeddings& emb,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << emb.num_nodes << ' ' << emb.dim << '\n';
  out << std::setprecision(9);
  for (NodeId i = 0; i < emb.num_nodes; ++i) {
    out << emb.node_names[i];
    for (double v : emb.row(i)) out << ' ' << v;
    out << '\n';
  }
}

FinalEmbeddings read_embeddings_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read embeddings file: " + path);
  FinalEmbeddings emb;
  std::string header;
  if (!std::getline(in, header)) throw InputError(path + ": empty file");
  {
    std::istringstream hs(header);
    if (!(hs >> emb.num_nodes >> emb.dim))
      throw InputError(path + ": bad header line");
  }
  emb.data.resize(emb.num_nodes * emb.dim);
  emb.node_names.resize(emb.num_nodes);
  std::string line;
  for (std::size_t i = 0; i < emb.num_nodes; ++i) {
    if (!std::getline(in, line))
      throw InputError(path + ": truncated at row " + std::to_string(i));
    std::istringstream ls(line);
    if (!(ls >> emb.node_names[i]))
      throw InputError(path + ": bad row " + std::to_string(i));
    for (std::size_t k = 0; k < emb.dim; ++k)
      if (!(ls >> emb.data[i * emb.dim + k]))
        throw InputError(path + ": bad row " + std::to_string(i));
  }
  return emb;
}

void write_embeddings_binary(const FinalEmbeddings& emb,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  for (double v : emb.data) {
    float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  }
  std::ofstream side(path + ".json");
  if (!side) throw InputError("cannot write " + path + ".json");
  side << "{\"num_nodes\": " << emb.num_nodes << ", \"dim\": " << emb.dim
       << ", \"dtype\": \"float32\", \"byte_order\": \"little\"}\n";
}

void write_loss_trace(const std::vector<LossBreakdown>& trace,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "epoch,total,div,c1,c2\n";
  out << std::setprecision(12);
  for (std::size_t e = 0; e < trace.size(); ++e)
    out << e << ',' << trace[e].total << ',' << trace[e].div << ','
        << trace[e].c1 << ',' << trace[e].c2 << '\n';
}

void write_attention_report(const std::vector<std::string>& node_names,
                            const std::vector<double>& weights,
                            std::size_t num_views, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "node,view,weight\n";
  out << std::setprecision(9);
  for (std::size_t i = 0; i < node_names.size(); ++i)
    for (std::size_t v = 0; v < num_views; ++v)
      out << node_names[i] << ',' << v << ','
          << weights[i * num_views + v] << '\n';
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mvembed
