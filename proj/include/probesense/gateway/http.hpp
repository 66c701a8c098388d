#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probesense::gateway {

struct HttpRequest {
    std::string method;
    std::string path;  ///< decoded path without the query string
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;  ///< lowercase names
    std::string body;

    /// Splits `target` into path and query.
    static HttpRequest make(std::string method, std::string_view target, std::string body = {});
    std::optional<std::string> header(const std::string& lowercase_name) const;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

std::string url_decode(std::string_view s);
std::map<std::string, std::string> parse_query(std::string_view qs);

struct MultipartPart {
    std::string name;
    std::string filename;
    std::string content_type;
    std::string data;
};

/// multipart/form-data body. Throws ValidationError on a missing boundary or
/// a malformed part.
std::vector<MultipartPart> parse_multipart(std::string_view content_type, std::string_view body);

}  // namespace probesense::gateway
