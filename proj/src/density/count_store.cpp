#include "probesense/density/count_store.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace probesense::density {

namespace fs = std::filesystem;

fs::path CountStore::file(const std::string& scanner_id) const { return root_ / "density" / (scanner_id + ".ndjson"); }

void CountStore::append(const DensitySample& sample) {
    std::lock_guard lock(mu_);
    const auto f = file(sample.scanner_id);
    std::error_code ec;
    fs::create_directories(f.parent_path(), ec);
    std::ofstream out(f, std::ios::app | std::ios::binary);
    out << sample_to_json(sample).dump() << "\n";
    if (!out) throw std::runtime_error(f.string() + ": write failed");
}

std::vector<DensitySample> CountStore::read(const std::string& scanner_id) const {
    std::lock_guard lock(mu_);
    std::vector<DensitySample> out;
    std::ifstream in(file(scanner_id), std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(sample_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception&) {
        }
    }
    return out;
}

std::vector<DensitySample> CountStore::read_range(const std::string& scanner_id, EpochMs from, EpochMs to) const {
    auto all = read(scanner_id);
    std::erase_if(all, [&](const DensitySample& s) { return s.ts < from || s.ts >= to; });
    return all;
}

std::vector<std::string> CountStore::scanners() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& de : fs::directory_iterator(root_ / "density", ec)) {
        if (de.path().extension() == ".ndjson") out.push_back(de.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::shared_ptr<RealtimeChannel::Queue> RealtimeChannel::subscribe() {
    auto q = std::make_shared<Queue>(capacity_);
    std::lock_guard lock(mu_);
    queues_.push_back(q);
    return q;
}

void RealtimeChannel::unsubscribe(const std::shared_ptr<Queue>& q) {
    std::lock_guard lock(mu_);
    std::erase(queues_, q);
    q->close();
}

void RealtimeChannel::publish(const DensitySample& sample) {
    std::lock_guard lock(mu_);
    for (const auto& q : queues_) {
        if (!q->push(sample)) ++dropped_;
    }
}

std::size_t RealtimeChannel::subscribers() const {
    std::lock_guard lock(mu_);
    return queues_.size();
}

std::uint64_t RealtimeChannel::dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
}

}  // namespace probesense::density
