// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "parlab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "parlab/errors.hpp"
#include "parlab/rng.hpp"

namespace parlab::num {

namespace {

std::vector<unsigned char> blob_bytes(const ParamSet& params) {
    std::vector<unsigned char> blob;
    for (const auto& [name, t] : params) {
        for (float v : t.data) {
            uint32_t u;
            std::memcpy(&u, &v, 4);
            // shifting by value is endian-agnostic; bytes land little-endian
            blob.push_back(static_cast<unsigned char>(u & 0xff));
            blob.push_back(static_cast<unsigned char>((u >> 8) & 0xff));
            blob.push_back(static_cast<unsigned char>((u >> 16) & 0xff));
            blob.push_back(static_cast<unsigned char>((u >> 24) & 0xff));
        }
    }
    return blob;
}

} // namespace

uint64_t checkpoint_blob_hash(const ParamSet& params) {
    auto blob = blob_bytes(params);
    return fnv1a64(blob.data(), blob.size());
}

std::string checkpoint_id(const ParamSet& params) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << checkpoint_blob_hash(params);
    return os.str();
}

void save_checkpoint(const ParamSet& params, const std::string& stem) {
    auto blob = blob_bytes(params);

    nlohmann::json manifest;
    manifest["format"] = "parlab-checkpoint-v1";
    auto& entries = manifest["entries"] = nlohmann::json::array();
    int64_t offset = 0;
    for (const auto& [name, t] : params) { // std::map iterates lexicographically
        entries.push_back({{"name", name}, {"shape", t.shape}, {"byte_offset", offset}});
        offset += t.numel() * 4;
    }
    manifest["blob_bytes"] = offset;
    manifest["blob_fnv1a64"] = checkpoint_id(params);

    std::ofstream jf(stem + ".json", std::ios::trunc);
    if (!jf) throw IoError("cannot write " + stem + ".json");
    jf << manifest.dump(2) << "\n";

    std::ofstream bf(stem + ".bin", std::ios::trunc | std::ios::binary);
    if (!bf) throw IoError("cannot write " + stem + ".bin");
    bf.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
}

ParamSet load_checkpoint(const std::string& stem) {
    std::ifstream jf(stem + ".json");
    if (!jf) throw IoError("cannot read checkpoint manifest " + stem + ".json");
    nlohmann::json manifest = nlohmann::json::parse(jf);

    std::ifstream bf(stem + ".bin", std::ios::binary);
    if (!bf) throw IoError("cannot read checkpoint blob " + stem + ".bin");
    std::vector<unsigned char> blob((std::istreambuf_iterator<char>(bf)),
                                    std::istreambuf_iterator<char>());

    ParamSet params;
    for (const auto& e : manifest.at("entries")) {
        std::string name = e.at("name");
        std::vector<int64_t> shape = e.at("shape").get<std::vector<int64_t>>();
        int64_t offset = e.at("byte_offset");
        int64_t n = Tensor::numel_of(shape);
        if (offset < 0 || offset + n * 4 > static_cast<int64_t>(blob.size()))
            throw IoError("checkpoint entry '" + name + "' overruns blob in " + stem);
        Tensor t = Tensor::zeros(shape);
        for (int64_t i = 0; i < n; ++i) {
            size_t p = static_cast<size_t>(offset + i * 4);
            uint32_t u = static_cast<uint32_t>(blob[p]) | (static_cast<uint32_t>(blob[p + 1]) << 8) |
                         (static_cast<uint32_t>(blob[p + 2]) << 16) |
                         (static_cast<uint32_t>(blob[p + 3]) << 24);
            float v;
            std::memcpy(&v, &u, 4);
            t.data[static_cast<size_t>(i)] = v;
        }
        params.emplace(std::move(name), std::move(t));
    }
    return params;
}

} // namespace parlab::num
