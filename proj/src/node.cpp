#include "rina/node.hpp"

#include "rina/error.hpp"
#include "rina/network.hpp"

namespace rina {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::kHost: return "host";
        case NodeKind::kInteriorRouter: return "interior-router";
        case NodeKind::kBorderRouter: return "border-router";
    }
    return "?";
}

Node::~Node() = default;

Ipcp& Node::add_ipcp(const DifConfig& dif, const std::string& ipcp_name, Address address) {
    ipcps_.push_back(std::make_unique<Ipcp>(engine_, tracer_, net_, *this, ipcp_name, dif, address));
    return *ipcps_.back();
}

AppEntity& Node::add_app(std::unique_ptr<AppEntity> app) {
    apps_.push_back(std::move(app));
    return *apps_.back();
}

AppEntity* Node::find_app(const Apn& apn) {
    for (auto& a : apps_) {
        if (a->apn() == apn) return a.get();
    }
    return nullptr;
}

Ipcp* Node::find_ipcp(const std::string& ipcp_name) {
    for (auto& i : ipcps_) {
        if (i->name() == ipcp_name) return i.get();
    }
    return nullptr;
}

Ipcp* Node::find_ipcp_above(const Ipcp& lower, const Apn& apn) {
    for (auto& i : ipcps_) {
        if (i->name() != apn.name) continue;
        for (const auto& l : lowers_of(i->name())) {
            if (l == lower.name()) return i.get();
        }
    }
    return nullptr;
}

void Node::set_stacking(const std::string& upper, const std::vector<std::string>& lowers) {
    stacking_[upper] = lowers;
}

const std::vector<std::string>& Node::lowers_of(const std::string& upper) const {
    static const std::vector<std::string> kEmpty;
    auto it = stacking_.find(upper);
    return it == stacking_.end() ? kEmpty : it->second;
}

void Node::bind(PortIdValue port, Ipcp* provider, FlowUser user) {
    bindings_[port] = Binding{provider, std::move(user)};
}

void Node::unbind(PortIdValue port) {
    bindings_.erase(port);
}

const Node::Binding* Node::binding(PortIdValue port) const {
    auto it = bindings_.find(port);
    return it == bindings_.end() ? nullptr : &it->second;
}

void Node::write_down(PortIdValue port, Sdu sdu) {
    engine_.schedule(engine_.now(), [this, port, sdu = std::move(sdu)]() {
        auto it = bindings_.find(port);
        if (it == bindings_.end() || !it->second.provider) return;  // torn down in flight
        it->second.provider->user_write(port, sdu);
    });
}

void Node::deliver_up(PortIdValue port, Sdu sdu) {
    engine_.schedule(engine_.now(), [this, port, sdu = std::move(sdu)]() {
        auto it = bindings_.find(port);
        if (it == bindings_.end() || !it->second.user.deliver) return;
        it->second.user.deliver(port, sdu);
    });
}

}  // namespace rina
