#include "metadesign/database.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "metadesign/bitmap_codec.hpp"
#include "metadesign/error.hpp"

namespace metadesign {

std::int64_t Database::add(Microstructure cell, const StiffnessComponents& props, std::optional<std::int64_t> id) {
    if (cell.height() != header.height || cell.width() != header.width)
        throw DimensionError("record grid size does not match the database header");
    const std::int64_t rid = id.value_or(next_id_);
    if (by_id_.count(rid)) throw DomainError("duplicate record id " + std::to_string(rid));
    cell.id = rid;
    const std::uint64_t h = bitmap_hash(cell);
    by_id_[rid] = records_.size();
    by_hash_.emplace(h, records_.size());
    records_.push_back({rid, std::move(cell), props, std::nullopt, std::nullopt});
    next_id_ = std::max(next_id_, rid + 1);
    return rid;
}

const DatabaseRecord& Database::at_id(std::int64_t id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw DomainError("unknown record id " + std::to_string(id));
    return records_[it->second];
}

bool Database::contains_hash(std::uint64_t h) const { return by_hash_.count(h) > 0; }

std::vector<StiffnessComponents> Database::properties() const {
    std::vector<StiffnessComponents> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.properties);
    return out;
}

bool Database::fully_annotated() const {
    for (const auto& r : records_)
        if (!r.latent) return false;
    return true;
}

std::string format_record(const DatabaseRecord& r) {
    std::string line = std::to_string(r.id) + "\t" + encode_bitmap(r.cell) + "\t";
    char buf[32];
    const auto p = r.properties.to_array();
    for (std::size_t i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", p[i]);
        line += (i ? "," : "") + std::string(buf);
    }
    if (r.latent) {
        line += "\t";
        for (std::size_t i = 0; i < r.latent->size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", (*r.latent)[i]);
            line += (i ? "," : "") + std::string(buf);
        }
    }
    return line;
}

std::uint64_t Database::content_hash() const {
    std::uint64_t h = fnv1a64(std::string_view{});
    for (const auto& r : records_) {
        const std::string line = format_record(r) + "\n";
        h = fnv1a64(line, h);
    }
    return h;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, int lineno) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
            throw FormatError("malformed number '" + tok + "'", lineno);
        out.push_back(v);
    }
    return out;
}

}  // namespace

void save_database(const Database& db, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open database file for writing: " + path.string());
    char buf[160];
    std::snprintf(buf, sizeof buf, "#metadb v%d %d %d %d %.17g %.17g\n", db.header.version, db.header.height,
                  db.header.width, db.header.latent_dim, db.header.material.youngs_modulus,
                  db.header.material.poisson_ratio);
    os << buf;
    std::uint64_t h = fnv1a64(std::string_view{});
    for (const auto& r : db.records()) {
        const std::string line = format_record(r) + "\n";
        h = fnv1a64(line, h);
        os << line;
    }
    os << "#checksum " << hex64(h) << "\n";
    if (!os) throw Error("failed writing database file: " + path.string());
}

Database load_database(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open database file: " + path.string());
    std::string line;
    int lineno = 0;
    if (!std::getline(is, line)) throw FormatError("missing database header", 1);
    ++lineno;
    Database db;
    {
        std::istringstream ss(line);
        std::string tag, ver;
        ss >> tag >> ver;
        if (tag != "#metadb") throw FormatError("missing #metadb header", lineno);
        if (ver != "v1") throw VersionMismatch("unsupported database version '" + ver + "'");
        if (!(ss >> db.header.height >> db.header.width >> db.header.latent_dim >> db.header.material.youngs_modulus >>
              db.header.material.poisson_ratio))
            throw FormatError("malformed database header", lineno);
        db.header.material.validate();
    }
    std::uint64_t h = fnv1a64(std::string_view{});
    bool have_checksum = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.rfind("#checksum ", 0) == 0) {
            const std::string expected = line.substr(10);
            if (expected != hex64(h)) throw ChecksumFailure("database checksum mismatch");
            have_checksum = true;
            if (std::getline(is, line)) throw FormatError("content after checksum line", lineno + 1);
            break;
        }
        h = fnv1a64(line + "\n", h);
        const auto fields = split(line, '\t');
        if (fields.size() != 3 && fields.size() != 4) throw FormatError("malformed record line", lineno);
        std::int64_t id = 0;
        {
            auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id);
            if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size())
                throw FormatError("malformed record id", lineno);
        }
        Microstructure cell;
        try {
            cell = decode_bitmap(fields[1], db.header.height, db.header.width);
        } catch (const Error& e) {
            throw FormatError(std::string("bad bitmap: ") + e.what(), lineno);
        }
        const auto props = parse_doubles(fields[2], lineno);
        if (props.size() != 4) throw FormatError("expected four stiffness components", lineno);
        try {
            db.add(std::move(cell), {props[0], props[1], props[2], props[3]}, id);
        } catch (const DomainError& e) {
            throw FormatError(e.what(), lineno);
        }
        if (fields.size() == 4) {
            auto z = parse_doubles(fields[3], lineno);
            if (static_cast<int>(z.size()) != db.header.latent_dim)
                throw FormatError("latent vector length does not match header", lineno);
            db.records().back().latent = std::move(z);
        }
    }
    if (!have_checksum) throw FormatError("truncated database file (missing checksum)", lineno + 1);
    return db;
}

}  // namespace metadesign
