#include "probesense/collector/archive.hpp"

#include <algorithm>
#include <fstream>

#include "probesense/core/bytes.hpp"
#include "probesense/core/errors.hpp"

namespace probesense::collector {

namespace fs = std::filesystem;
using nlohmann::json;

json record_to_json(const ArchiveRecord& r) {
    json j = agent::entry_to_json(r.entry);
    j["received_at"] = r.received_at;
    j["scanner_id"] = r.scanner_id;
    return j;
}

ArchiveRecord record_from_json(const json& j) {
    ArchiveRecord r;
    if (!j.is_object() || !j.contains("received_at") || !j["received_at"].is_number_integer()) {
        throw ValidationError("record.received_at", "missing or not an integer");
    }
    if (!j.contains("scanner_id") || !j["scanner_id"].is_string()) {
        throw ValidationError("record.scanner_id", "missing or not a string");
    }
    r.received_at = j["received_at"].get<EpochMs>();
    r.scanner_id = j["scanner_id"].get<std::string>();
    r.entry = agent::entry_from_json(j, "record");
    return r;
}

ArchiveStore::ArchiveStore(fs::path root, int write_attempts)
    : root_(std::move(root)), write_attempts_(std::max(1, write_attempts)) {}

fs::path ArchiveStore::day_file(const std::string& scanner_id, const std::string& date) const {
    return root_ / scanner_id / (date + ".ndjson");
}

void ArchiveStore::append_lines(const fs::path& file, const std::string& text) {
    std::string last_error;
    for (int attempt = 0; attempt < write_attempts_; ++attempt) {
        if (fault_ && fault_(file)) {
            last_error = "injected write failure";
            continue;
        }
        std::error_code ec;
        fs::create_directories(file.parent_path(), ec);
        std::ofstream out(file, std::ios::app | std::ios::binary);
        if (!out) {
            last_error = "cannot open for append";
            continue;
        }
        out << text;
        out.flush();
        if (out) return;
        last_error = "write failed";
    }
    throw StorageError(file.string() + ": " + last_error + " after " + std::to_string(write_attempts_) + " attempts");
}

void ArchiveStore::append(const std::vector<ArchiveRecord>& records) {
    std::map<fs::path, std::string> by_file;
    for (const auto& r : records) {
        by_file[day_file(r.scanner_id, utc_date(r.entry.last_seen))] += record_to_json(r).dump() + "\n";
    }
    for (const auto& [file, text] : by_file) append_lines(file, text);
}

void ArchiveStore::append_dead_letter(EpochMs received_at, const std::string& topic, const std::string& reason,
                                      const std::string& payload) {
    const json j = {{"received_at", received_at},
                    {"topic", topic},
                    {"reason", reason},
                    {"payload_base64", base64_encode(payload)}};
    append_lines(dead_letter_file(), j.dump() + "\n");
}

void ArchiveStore::note_scanner(const std::string& scanner_id, EpochMs first_received_at) {
    const auto file = root_ / scanner_id / "scanner.json";
    std::error_code ec;
    if (fs::exists(file, ec)) return;
    fs::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::binary);
    out << json{{"scanner_id", scanner_id}, {"first_received_at", first_received_at}}.dump() << "\n";
    if (!out) throw StorageError(file.string() + ": cannot write scanner marker");
}

namespace {

void read_file(const fs::path& file, std::vector<ArchiveRecord>& out) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // A torn final line from a concurrent writer is skipped.
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception&) {
        }
    }
}

std::vector<fs::path> day_files(const fs::path& dir) {
    std::vector<fs::path> files;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return files;
    for (const auto& de : fs::directory_iterator(dir, ec)) {
        if (de.path().extension() == ".ndjson") files.push_back(de.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::vector<ArchiveRecord> read_range(const fs::path& root, const std::string& scanner_id, EpochMs from, EpochMs to) {
    std::vector<ArchiveRecord> out;
    if (to <= from) return out;
    const auto first = utc_date(from);
    const auto last = utc_date(to - 1);
    for (const auto& file : day_files(root / scanner_id)) {
        const auto date = file.stem().string();
        if (date < first || date > last) continue;
        read_file(file, out);
    }
    std::erase_if(out, [&](const ArchiveRecord& r) { return r.entry.last_seen < from || r.entry.last_seen >= to; });
    std::stable_sort(out.begin(), out.end(), [](const ArchiveRecord& a, const ArchiveRecord& b) {
        return a.entry.last_seen < b.entry.last_seen;
    });
    return out;
}

std::vector<ArchiveRecord> read_all(const fs::path& root, const std::string& scanner_id) {
    std::vector<ArchiveRecord> out;
    for (const auto& file : day_files(root / scanner_id)) read_file(file, out);
    return out;
}

std::map<std::string, EpochMs> archived_scanners(const fs::path& root) {
    std::map<std::string, EpochMs> out;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return out;
    for (const auto& de : fs::directory_iterator(root, ec)) {
        const auto marker = de.path() / "scanner.json";
        if (!fs::is_regular_file(marker, ec)) continue;
        std::ifstream in(marker);
        try {
            const auto j = json::parse(in);
            out[j.at("scanner_id").get<std::string>()] = j.at("first_received_at").get<EpochMs>();
        } catch (const std::exception&) {
        }
    }
    return out;
}

std::vector<json> read_dead_letters(const fs::path& root) {
    std::vector<json> out;
    std::ifstream in(root / "deadletter.ndjson");
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

}  // namespace probesense::collector
