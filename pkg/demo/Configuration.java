package demo.config;

import java.util.Properties;

public class Configuration {
    private final Properties properties = new Properties();

    /**
     * Gets the property value for the key, or the default value when the key is missing.
     */
    public String getProperty(String key, String defaultValue) {
        String value = properties.getProperty(key);
        if (value == null) {
            return defaultValue;
        }
        return value;
    }

    // sets the property value for the given key
    public void setProperty(String key, String value) {
        properties.setProperty(key, value);
    }

    /** Gets the int property value for the key (naïve parse). */
    public int getIntProperty(String key) {
        return Integer.parseInt(properties.getProperty(key, "0"));
    }
}
