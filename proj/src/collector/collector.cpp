#include "probesense/collector/collector.hpp"

#include <openssl/evp.h>

#include <iostream>

#include "probesense/core/errors.hpp"

namespace probesense::collector {

MacAddress pseudonymize(const MacAddress& mac, const std::string& salt) {
    const auto text = salt + mac.to_string();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 digest failed");
    }
    MacAddress::Octets o{};
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = digest[i];
    o[0] = static_cast<std::uint8_t>((o[0] & 0xFC) | (mac.octets()[0] & 0x02));
    return MacAddress(o);
}

Collector::Collector(CollectorConfig config, std::shared_ptr<transport::Broker> broker, Clock clock)
    : config_(std::move(config)),
      broker_(std::move(broker)),
      clock_(std::move(clock)),
      store_(config_.store_root, config_.write_attempts) {
    for (const auto& [id, first] : archived_scanners(config_.store_root)) known_scanners_.insert(id);
}

Collector::~Collector() { stop(); }

void Collector::start() {
    if (session_) return;
    session_ = broker_->connect("probesense-collector");
    session_->subscribe("probesense/v1/+/data", [this](const transport::Message& m) { handle(m); });
}

void Collector::stop() {
    if (session_) session_->close();
    session_.reset();
}

void Collector::handle(const transport::Message& msg) {
    std::lock_guard lock(mu_);
    if (halted_) return;
    ++metrics_.messages;
    const EpochMs now = clock_();
    try {
        std::string reason;
        agent::ObservationBatch batch;
        try {
            batch = agent::parse_batch(msg.payload);
            const auto topic_scanner = agent::scanner_from_topic(msg.topic);
            if (topic_scanner != batch.scanner_id) {
                reason = "scanner_id '" + batch.scanner_id + "' does not match topic";
            }
            for (const auto& e : batch.entries) {
                if (e.last_seen > now + config_.clock_skew_ms) {
                    reason = "entry last_seen beyond receive time plus allowed skew";
                    break;
                }
            }
        } catch (const ValidationError& e) {
            reason = e.what();
        }
        if (!reason.empty()) {
            store_.append_dead_letter(now, msg.topic, reason, msg.payload);
            ++metrics_.dead_letters;
            return;
        }
        if (known_scanners_.insert(batch.scanner_id).second) store_.note_scanner(batch.scanner_id, now);
        std::vector<ArchiveRecord> records;
        records.reserve(batch.entries.size());
        for (auto& e : batch.entries) {
            if (config_.pseudonym_salt) e.mac = pseudonymize(e.mac, *config_.pseudonym_salt);
            records.push_back({now, batch.scanner_id, std::move(e)});
        }
        store_.append(records);
        metrics_.records += records.size();
    } catch (const StorageError& e) {
        halted_ = e.what();
        std::cerr << "collector halted: " << e.what() << "\n";
        if (session_) session_->close();
    }
}

CollectorMetrics Collector::metrics() const {
    std::lock_guard lock(mu_);
    return metrics_;
}

std::optional<std::string> Collector::halted() const {
    std::lock_guard lock(mu_);
    return halted_;
}

}  // namespace probesense::collector
