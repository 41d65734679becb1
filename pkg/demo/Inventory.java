package demo.shop;

import java.util.HashMap;
import java.util.Map;

public class Inventory {
    private final Map<String, Integer> stock = new HashMap<>();

    /**
     * Adds the quantity of the item to the stock.
     */
    public void addItem(String item, int quantity) {
        stock.merge(item, quantity, Integer::sum);
    }

    /**
     * Removes the quantity of the item from the stock if enough items are available.
     */
    public boolean removeItem(String item, int quantity) {
        Integer available = stock.get(item);
        if (available == null || available < quantity) {
            return false;
        }
        stock.put(item, available - quantity);
        return true;
    }

    // returns the total quantity of all items in stock
    public int totalQuantity() {
        int total = 0;
        for (int quantity : stock.values()) {
            total += quantity;
        }
        return total;
    }
}
