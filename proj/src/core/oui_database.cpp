#include "probesense/core/oui_database.hpp"

#include <fstream>
#include <sstream>

#include "probesense/core/errors.hpp"

namespace probesense {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<std::uint32_t> parse_prefix(const std::string& text) {
    // Reuse the MAC parser by padding the prefix to a full address.
    auto mac = MacAddress::parse(text + ":00:00:00");
    if (!mac && text.size() == 8 && text[2] == '-') mac = MacAddress::parse(text + "-00-00-00");
    if (!mac) return std::nullopt;
    return mac->oui();
}

}  // namespace

OuiDatabase OuiDatabase::from_csv(std::istream& in) {
    OuiDatabase db;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("oui:" + std::to_string(lineno), "expected 'XX:YY:ZZ,Vendor'");
        }
        const auto prefix = parse_prefix(trim(line.substr(0, comma)));
        auto vendor = trim(line.substr(comma + 1));
        if (!prefix || vendor.empty()) {
            throw ValidationError("oui:" + std::to_string(lineno), "expected 'XX:YY:ZZ,Vendor'");
        }
        db.add(*prefix, std::move(vendor));
    }
    return db;
}

OuiDatabase OuiDatabase::load(const std::filesystem::path& oui_csv,
                              const std::filesystem::path& mobile_vendor_list) {
    std::ifstream csv(oui_csv);
    if (!csv) throw ValidationError("oui", "cannot open " + oui_csv.string());
    auto db = from_csv(csv);
    std::ifstream vendors(mobile_vendor_list);
    if (!vendors) throw ValidationError("mobile_vendors", "cannot open " + mobile_vendor_list.string());
    db.load_mobile_vendors(vendors);
    return db;
}

const OuiDatabase& OuiDatabase::builtin() {
    static const OuiDatabase db = [] {
        // Keep in sync with data/oui.csv and data/mobile_vendors.txt.
        std::istringstream csv(
            "28:CF:E9,Apple\n"
            "F0:99:BF,Apple\n"
            "5C:F8:A1,Samsung\n"
            "84:25:DB,Samsung\n"
            "A8:9C:ED,Xiaomi\n"
            "64:09:80,Xiaomi\n"
            "00:0C:29,VMware\n"
            "B8:27:EB,Raspberry Pi Foundation\n");
        auto out = from_csv(csv);
        out.add_mobile_vendor("Apple");
        out.add_mobile_vendor("Samsung");
        out.add_mobile_vendor("Xiaomi");
        return out;
    }();
    return db;
}

void OuiDatabase::load_mobile_vendors(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        mobile_vendors_.insert(line);
    }
}

void OuiDatabase::add(std::uint32_t oui, std::string vendor) { entries_[oui & 0xffffff] = std::move(vendor); }

std::string OuiDatabase::lookup_prefix(std::uint32_t oui) const {
    auto it = entries_.find(oui);
    return it == entries_.end() ? std::string(kUnknownVendor) : it->second;
}

std::string vendor_lookup(const OuiDatabase& db, const MacAddress& mac) {
    if (mac.is_randomized()) return std::string(kUnknownVendor);
    return db.lookup_prefix(mac.oui());
}

bool is_mobile_vendor(const OuiDatabase& db, const MacAddress& mac) {
    if (mac.is_randomized()) return true;
    return db.is_mobile(vendor_lookup(db, mac));
}

}  // namespace probesense
