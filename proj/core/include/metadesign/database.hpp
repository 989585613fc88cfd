#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "metadesign/homogenization.hpp"
#include "metadesign/microstructure.hpp"
#include "metadesign/stiffness.hpp"

namespace metadesign {

struct DatabaseRecord {
    std::int64_t id = 0;
    Microstructure cell;
    StiffnessComponents properties;
    std::optional<std::vector<double>> latent;
    std::optional<BoundaryStressTraces> traces;  // in-memory only
};

struct DatabaseHeader {
    int version = 1;
    int height = 50;
    int width = 50;
    int latent_dim = 16;
    MaterialSpec material;
};

class Database {
public:
    DatabaseHeader header;

    Database() = default;
    explicit Database(DatabaseHeader h) : header(h) {}

    const std::vector<DatabaseRecord>& records() const noexcept { return records_; }
    std::vector<DatabaseRecord>& records() noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// Appends a record; assigns the next free id when `id` is unset.
    /// Throws DomainError on duplicate id or mismatched grid size.
    std::int64_t add(Microstructure cell, const StiffnessComponents& props,
                     std::optional<std::int64_t> id = std::nullopt);
    const DatabaseRecord& at_id(std::int64_t id) const;
    bool contains_hash(std::uint64_t bitmap_hash) const;

    std::vector<StiffnessComponents> properties() const;
    bool fully_annotated() const;
    /// FNV-1a over all record lines, as written by save_database.
    std::uint64_t content_hash() const;

private:
    std::vector<DatabaseRecord> records_;
    std::unordered_map<std::int64_t, std::size_t> by_id_;
    std::unordered_map<std::uint64_t, std::size_t> by_hash_;
    std::int64_t next_id_ = 0;
};

/// Text format: `#metadb v1 H W J E nu`, one tab-separated line per record,
/// and a trailing `#checksum <hex>` over the record lines.
void save_database(const Database& db, const std::filesystem::path& path);
/// Throws VersionMismatch, ChecksumFailure, or FormatError with the line number.
Database load_database(const std::filesystem::path& path);

std::string format_record(const DatabaseRecord& r);

}  // namespace metadesign
