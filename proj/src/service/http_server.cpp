#include "tws/service.hpp"

#include <httplib.h>

#include <iostream>

namespace tws::service {

struct HttpServer::Impl
{
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service))
{
    const Config& cfg = service.config();
    auto& server = impl_->server;

    if (cfg.static_dir && !server.set_mount_point("/", cfg.static_dir->string()))
        std::cerr << "warning: static directory " << cfg.static_dir->string() << " not found\n";

    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        Response r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        if (r.status != 204)
            res.set_content(r.body, r.content_type);
    };
    for (const char* pattern : {"/workspaces.*", "/sessions.*"}) {
        server.Get(pattern, forward);
        server.Post(pattern, forward);
        server.Put(pattern, forward);
        server.Delete(pattern, forward);
    }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0)
        return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::listen()
{
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    impl_->server.stop();
}

int serve(Service& service)
{
    const Config& cfg = service.config();
    HttpServer http(service);
    if (http.bind(cfg.host, cfg.port) < 0) {
        std::cerr << "cannot listen on " << cfg.host << ":" << cfg.port << "\n";
        return 1;
    }
    std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
    http.listen();
    return 0;
}

} // namespace tws::service
