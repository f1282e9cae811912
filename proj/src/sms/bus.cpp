#include "gpslab/sms/bus.hpp"

#include <iostream>

#include "gpslab/core/error.hpp"

namespace gpslab::sms {

void SmsBus::subscribe(const std::string& phone, Subscriber subscriber) {
    std::lock_guard lock(mu_);
    subscribers_[phone] = std::move(subscriber);
}

void SmsBus::unsubscribe(const std::string& phone) {
    std::lock_guard lock(mu_);
    subscribers_.erase(phone);
}

bool SmsBus::is_registered(const std::string& phone) const {
    std::lock_guard lock(mu_);
    return subscribers_.contains(phone);
}

Delivery SmsBus::send(const SmsMessage& msg) {
    if (msg.body.size() > kMaxSmsBody) throw Error(Errc::Range, "body", "SMS body longer than 160 characters");
    std::unique_lock lock(mu_);
    const bool registered = subscribers_.contains(msg.to);
    LogEntry entry;
    entry.seq = log_.size();
    entry.ts = clock_ ? clock_->now() : SimTimestamp{};
    entry.msg = msg;
    entry.delivery = registered ? Delivery::Delivered : Delivery::NotDelivered;
    log_.push_back(entry);
    if (!registered) return Delivery::NotDelivered;
    pending_.push_back(msg);
    if (!draining_) drain(lock);
    return Delivery::Delivered;
}

void SmsBus::drain(std::unique_lock<std::mutex>& lock) {
    draining_ = true;
    while (!pending_.empty()) {
        SmsMessage msg = std::move(pending_.front());
        pending_.pop_front();
        const auto it = subscribers_.find(msg.to);
        if (it == subscribers_.end()) continue;
        Subscriber sub = it->second;
        lock.unlock();
        try {
            sub(msg);
        } catch (const std::exception& e) {
            std::cerr << "sms: subscriber " << msg.to << " failed: " << e.what() << '\n';
        }
        lock.lock();
    }
    draining_ = false;
    idle_.notify_all();
}

std::vector<LogEntry> SmsBus::log() const {
    std::lock_guard lock(mu_);
    return log_;
}

void SmsBus::wait_idle() {
    std::unique_lock lock(mu_);
    idle_.wait(lock, [this] { return !draining_ && pending_.empty(); });
}

}  // namespace gpslab::sms
