#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/agent/batch.hpp"

namespace probesense::collector {

/// One batch entry as archived, stamped with the collector's receive time.
struct ArchiveRecord {
    EpochMs received_at = 0;
    std::string scanner_id;
    agent::BatchEntry entry;

    friend bool operator==(const ArchiveRecord&, const ArchiveRecord&) = default;
};

nlohmann::json record_to_json(const ArchiveRecord& r);
ArchiveRecord record_from_json(const nlohmann::json& j);

/// Storage could not be written after the configured retries.
class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Append-only day-partitioned files: `{root}/{scanner}/{YYYY-MM-DD}.ndjson`,
/// keyed by the entry's last_seen day.
class ArchiveStore {
public:
    /// Returns true to make a write attempt fail.
    using WriteFault = std::function<bool(const std::filesystem::path&)>;

    explicit ArchiveStore(std::filesystem::path root, int write_attempts = 3);

    const std::filesystem::path& root() const { return root_; }

    /// Appends records, one line each. Throws StorageError when a file stays
    /// unwritable after every attempt.
    void append(const std::vector<ArchiveRecord>& records);
    void append_dead_letter(EpochMs received_at, const std::string& topic, const std::string& reason,
                            const std::string& payload);
    /// Writes `{root}/{scanner}/scanner.json` unless it already exists.
    void note_scanner(const std::string& scanner_id, EpochMs first_received_at);

    void set_write_fault(WriteFault fault) { fault_ = std::move(fault); }

    std::filesystem::path day_file(const std::string& scanner_id, const std::string& date) const;
    std::filesystem::path dead_letter_file() const { return root_ / "deadletter.ndjson"; }

private:
    void append_lines(const std::filesystem::path& file, const std::string& text);

    std::filesystem::path root_;
    int write_attempts_;
    WriteFault fault_;
};

/// Records with entry.last_seen in [from, to), ordered by last_seen (ties
/// keep file order). Missing files give an empty result.
std::vector<ArchiveRecord> read_range(const std::filesystem::path& root, const std::string& scanner_id, EpochMs from,
                                      EpochMs to);

/// Every record for the scanner, in file order.
std::vector<ArchiveRecord> read_all(const std::filesystem::path& root, const std::string& scanner_id);

/// Scanner id -> first_received_at, from the per-scanner marker files.
std::map<std::string, EpochMs> archived_scanners(const std::filesystem::path& root);

/// Dead-letter lines as parsed objects.
std::vector<nlohmann::json> read_dead_letters(const std::filesystem::path& root);

}  // namespace probesense::collector
